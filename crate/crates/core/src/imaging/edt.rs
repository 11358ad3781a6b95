//! Exact Euclidean distance transform.
//!
//! Two-pass separable algorithm of Felzenszwalb & Huttenlocher: the squared
//! distance transform is the lower envelope of parabolas rooted at the column
//! transforms, computed per column and then per row in linear time. Squared
//! distances of integer boundary offsets are exact in f64, so the result is
//! exact (up to the correctly rounded final square root).

use super::{GrayImage, Mask};
use crate::error::{Error, Result};

/// Euclidean distance (in pixels) of every pixel to the nearest true pixel.
pub fn distance_transform(mask: &Mask) -> Result<GrayImage> {
    let mut sq = distance_transform_squared(mask)?;
    for v in sq.pixels.iter_mut() {
        *v = v.sqrt();
    }
    Ok(sq)
}

/// Squared Euclidean distance transform; exact integers in f64.
pub fn distance_transform_squared(mask: &Mask) -> Result<GrayImage> {
    if mask.count_true() == 0 {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let mut field = vec![0.0f64; w * h];

    // columns: 1D transform of the indicator costs
    let mut line = vec![0.0f64; h.max(w)];
    let mut out = vec![0.0f64; h.max(w)];
    let mut env = Envelope::new(h.max(w));
    for col in 0..w {
        for (row, slot) in line[..h].iter_mut().enumerate() {
            *slot = if mask.get(col, row) {
                0.0
            } else {
                f64::INFINITY
            };
        }
        env.transform(&line[..h], &mut out[..h]);
        for row in 0..h {
            field[row * w + col] = out[row];
        }
    }
    // rows
    for row in 0..h {
        line[..w].copy_from_slice(&field[row * w..(row + 1) * w]);
        env.transform(&line[..w], &mut out[..w]);
        field[row * w..(row + 1) * w].copy_from_slice(&out[..w]);
    }
    GrayImage::from_pixels(w, h, field)
}

/// Lower envelope of parabolas `f(q) + (x - q)^2`.
struct Envelope {
    roots: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn new(capacity: usize) -> Self {
        Self {
            roots: vec![0; capacity],
            bounds: vec![0.0; capacity + 1],
        }
    }

    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let mut k = 0usize;
        self.roots[0] = 0;
        self.bounds[0] = f64::NEG_INFINITY;
        self.bounds[1] = f64::INFINITY;
        for q in 1..n {
            if f[q] == f64::INFINITY {
                continue;
            }
            if f[self.roots[k]] == f64::INFINITY {
                // the only parabola so far was at +inf; replace it
                self.roots[k] = q;
                self.bounds[k] = f64::NEG_INFINITY;
                self.bounds[k + 1] = f64::INFINITY;
                continue;
            }
            let mut s = intersect(f, self.roots[k], q);
            while s <= self.bounds[k] {
                k -= 1;
                s = intersect(f, self.roots[k], q);
            }
            k += 1;
            self.roots[k] = q;
            self.bounds[k] = s;
            self.bounds[k + 1] = f64::INFINITY;
        }
        let mut k = 0usize;
        for (q, slot) in out.iter_mut().enumerate() {
            while self.bounds[k + 1] < q as f64 {
                k += 1;
            }
            let d = q as f64 - self.roots[k] as f64;
            *slot = d * d + f[self.roots[k]];
        }
    }
}

/// Abscissa where the parabolas rooted at `p` and `q` intersect.
#[inline]
fn intersect(f: &[f64], p: usize, q: usize) -> f64 {
    let (pf, qf) = (p as f64, q as f64);
    ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn brute_force_squared(mask: &Mask) -> Vec<f64> {
        let (w, h) = (mask.width(), mask.height());
        let mut sites = Vec::new();
        for row in 0..h {
            for col in 0..w {
                if mask.get(col, row) {
                    sites.push((col as i64, row as i64));
                }
            }
        }
        let mut out = vec![0.0; w * h];
        for row in 0..h {
            for col in 0..w {
                let mut best = i64::MAX;
                for &(sc, sr) in &sites {
                    let d = (sc - col as i64).pow(2) + (sr - row as i64).pow(2);
                    best = best.min(d);
                }
                out[row * w + col] = best as f64;
            }
        }
        out
    }

    #[test]
    fn single_center_pixel_gives_radial_field() {
        let (w, h) = (9, 9);
        let mut data = vec![false; w * h];
        data[4 * w + 4] = true;
        let mask = Mask::from_data(w, h, data).unwrap();
        let dt = distance_transform(&mask).unwrap();
        for row in 0..h {
            for col in 0..w {
                let expect = ((col as f64 - 4.0).powi(2) + (row as f64 - 4.0).powi(2)).sqrt();
                assert_eq!(dt.get(col, row), expect, "at ({col}, {row})");
            }
        }
    }

    #[test]
    fn all_true_mask_is_zero() {
        let mask = Mask::from_data(5, 3, vec![true; 15]).unwrap();
        let dt = distance_transform(&mask).unwrap();
        assert!(dt.pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_mask_is_rejected() {
        let mask = Mask::from_data(4, 4, vec![false; 16]).unwrap();
        assert!(matches!(distance_transform(&mask), Err(Error::EmptyMask)));
    }

    #[test]
    fn matches_brute_force_exactly_on_random_masks() {
        let mut rng = Rng::seed_from(101);
        for trial in 0..20 {
            let (w, h) = (64, 64);
            let density = 0.002 + 0.05 * rng.next_f64();
            let mut data: Vec<bool> = (0..w * h).map(|_| rng.next_f64() < density).collect();
            if data.iter().all(|&b| !b) {
                data[rng.next_u64() as usize % (w * h)] = true;
            }
            let mask = Mask::from_data(w, h, data).unwrap();
            let sq = distance_transform_squared(&mask).unwrap();
            let brute = brute_force_squared(&mask);
            for (i, (a, b)) in sq.pixels().iter().zip(brute.iter()).enumerate() {
                assert_eq!(a, b, "trial {trial}, pixel {i}");
            }
            // sqrt'd field also matches bitwise (same integers, same sqrt)
            let dt = distance_transform(&mask).unwrap();
            for (a, b) in dt.pixels().iter().zip(brute.iter()) {
                assert_eq!(*a, b.sqrt());
            }
        }
    }

    #[test]
    fn lipschitz_across_neighbours() {
        // the distance field changes by at most sqrt(2) across an 8-neighbour
        // step
        let mut rng = Rng::seed_from(55);
        let (w, h) = (48, 48);
        let data: Vec<bool> = (0..w * h).map(|_| rng.next_f64() < 0.01).collect();
        let mask = Mask::from_data(
            w,
            h,
            if data.iter().any(|&b| b) {
                data
            } else {
                let mut d = vec![false; w * h];
                d[0] = true;
                d
            },
        )
        .unwrap();
        let dt = distance_transform(&mask).unwrap();
        for row in 0..h {
            for col in 0..w {
                for (dc, dr) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                    let (nc, nr) = (col as i64 + dc, row as i64 + dr);
                    if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                        continue;
                    }
                    let step = ((dc * dc + dr * dr) as f64).sqrt();
                    let diff = (dt.get(col, row) - dt.get(nc as usize, nr as usize)).abs();
                    assert!(diff <= step + 1e-9, "Lipschitz violated: {diff} > {step}");
                }
            }
        }
    }
}
