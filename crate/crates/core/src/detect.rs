//! Latent point recovery from a probability map.
//!
//! Candidate texture-element centers are windowed local maxima of the map;
//! maxima that can reach each other along a segment without the map dropping
//! below a fraction `k2` of the higher endpoint likely belong to the same
//! texture element, so connected components of that relation each contribute
//! one representative (the member with the largest value). Every step is
//! deterministic, including plateau and component ties, which are broken
//! lexicographically on (row, col).

use crate::error::{Error, Result};
use crate::imaging::ProbabilityMap;
use crate::simulate::PointPattern;

/// Parameters of the detection stage.
#[derive(Debug, Clone, Copy)]
pub struct DetectionParams {
    /// Local-maximum window half-width in pixels (a `75 x 75` neighbourhood
    /// corresponds to `k1 = 37`).
    pub k1_px: u32,
    /// Neighbourhood-relation threshold in `(0, 1)`.
    pub k2: f64,
    /// Sampling step along segments, pixels.
    pub segment_step: f64,
    /// Optional Euclidean cutoff (pixels) beyond which maxima pairs are not
    /// tested; `None` tests all pairs.
    pub pair_cutoff: Option<f64>,
}

impl DetectionParams {
    pub fn new(k1_px: u32) -> Result<Self> {
        Self::with(k1_px, 0.25, 0.5)
    }

    pub fn with(k1_px: u32, k2: f64, segment_step: f64) -> Result<Self> {
        if k1_px == 0 {
            return Err(Error::InvalidDetectionParameter(
                "k1 must be positive".into(),
            ));
        }
        if !(k2 > 0.0 && k2 < 1.0) {
            return Err(Error::InvalidDetectionParameter(format!(
                "k2 must lie in (0, 1), got {k2}"
            )));
        }
        if !segment_step.is_finite() || segment_step <= 0.0 {
            return Err(Error::InvalidDetectionParameter(format!(
                "segment step must be positive, got {segment_step}"
            )));
        }
        Ok(Self {
            k1_px,
            k2,
            segment_step,
            pair_cutoff: None,
        })
    }

    /// Full window width in pixels, as neighbourhood sizes are usually quoted.
    pub fn from_window_size(size_px: u32, k2: f64, segment_step: f64) -> Result<Self> {
        Self::with(size_px / 2, k2, segment_step)
    }
}

/// A windowed local maximum at a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// The set of windowed local maxima of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximaSet {
    pub maxima: Vec<Maximum>,
}

impl MaximaSet {
    pub fn len(&self) -> usize {
        self.maxima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maxima.is_empty()
    }
}

/// All pixels whose `(2 k1 + 1)`-square neighbourhood lies inside the map and
/// whose value attains the neighbourhood maximum.
///
/// Plateaus are collapsed deterministically: of the pixels in a window that
/// attain its maximum, only the lexicographically smallest (row, col)
/// qualifies, so a constant map has no interior maxima.
pub fn local_maxima(map: &ProbabilityMap, k1_px: u32) -> Result<MaximaSet> {
    let k1 = k1_px as usize;
    let (w, h) = (map.width(), map.height());
    if 2 * k1 >= w.min(h) {
        return Err(Error::InvalidDetectionParameter(format!(
            "k1 = {k1} px does not fit the {w} x {h} map"
        )));
    }

    // separable sliding-window maximum over (2 k1 + 1)-windows
    let row_max = sliding_max_rows(map.values(), w, h, k1);
    let win_max = sliding_max_cols(&row_max, w, h, k1);

    let mut maxima = Vec::new();
    for row in k1..h - k1 {
        for col in k1..w - k1 {
            let v = map.get(col, row);
            if v != win_max[row * w + col] {
                continue;
            }
            // lexicographic plateau rule: scan the window for an earlier pixel
            // attaining the same maximum
            let mut first = true;
            'scan: for r in row - k1..=row + k1 {
                for c in col - k1..=col + k1 {
                    if map.get(c, r) == v {
                        if (r, c) < (row, col) {
                            first = false;
                        }
                        break 'scan;
                    }
                }
            }
            if first {
                maxima.push(Maximum { row, col, value: v });
            }
        }
    }
    Ok(MaximaSet { maxima })
}

fn sliding_max_rows(values: &[f64], w: usize, h: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::with_capacity(w);
    for row in 0..h {
        deque.clear();
        let line = &values[row * w..(row + 1) * w];
        for col in 0..w + k {
            if col < w {
                while let Some(&back) = deque.back() {
                    if line[back] <= line[col] {
                        deque.pop_back();
                    } else {
                        break;
                    }
                }
                deque.push_back(col);
            }
            if col >= k {
                let center = col - k;
                while deque[0] + k < center {
                    deque.pop_front();
                }
                out[row * w + center] = line[deque[0]];
            }
        }
    }
    out
}

fn sliding_max_cols(values: &[f64], w: usize, h: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::with_capacity(h);
    for col in 0..w {
        deque.clear();
        for row in 0..h + k {
            if row < h {
                while let Some(&back) = deque.back() {
                    if values[back * w + col] <= values[row * w + col] {
                        deque.pop_back();
                    } else {
                        break;
                    }
                }
                deque.push_back(row);
            }
            if row >= k {
                let center = row - k;
                while deque[0] + k < center {
                    deque.pop_front();
                }
                out[center * w + col] = values[deque[0] * w + col];
            }
        }
    }
    out
}

/// Neighbourhood relation: true when the map, sampled bilinearly along the
/// segment between the two pixel positions at `segment_step` spacing
/// (endpoints included), never drops below `k2` times the higher endpoint.
pub fn are_neighbours(
    map: &ProbabilityMap,
    a: (f64, f64),
    b: (f64, f64),
    k2: f64,
    segment_step: f64,
) -> bool {
    let va = map.sample_bilinear(a.0, a.1);
    let vb = map.sample_bilinear(b.0, b.1);
    let bar = k2 * va.max(vb);
    let len = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let steps = (len / segment_step).ceil().max(1.0) as usize;
    let mut min = f64::INFINITY;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let col = a.0 + t * (b.0 - a.0);
        let row = a.1 + t * (b.1 - a.1);
        min = min.min(map.sample_bilinear(col, row));
        if min < bar {
            return false;
        }
    }
    min >= bar
}

/// Partition of the maxima into connected components of the neighbourhood
/// relation; components are reported sorted by their smallest member index.
pub fn components(
    maxima: &MaximaSet,
    map: &ProbabilityMap,
    params: &DetectionParams,
) -> Vec<Vec<usize>> {
    let n = maxima.len();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    for i in 0..n {
        let mi = &maxima.maxima[i];
        for j in i + 1..n {
            let mj = &maxima.maxima[j];
            if let Some(cutoff) = params.pair_cutoff {
                let d2 = (mi.col as f64 - mj.col as f64).powi(2)
                    + (mi.row as f64 - mj.row as f64).powi(2);
                if d2 > cutoff * cutoff {
                    continue;
                }
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri == rj {
                continue;
            }
            if are_neighbours(
                map,
                (mi.col as f64, mi.row as f64),
                (mj.col as f64, mj.row as f64),
                params.k2,
                params.segment_step,
            ) {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Full detection chain: local maxima, neighbourhood components, one point per
/// component (the member with maximal value, lexicographic (row, col)
/// tiebreak), converted to window coordinates.
pub fn latent_points(map: &ProbabilityMap, params: &DetectionParams) -> Result<PointPattern> {
    let maxima = local_maxima(map, params.k1_px)?;
    let comps = components(&maxima, map, params);
    let mut points = Vec::with_capacity(comps.len());
    for comp in &comps {
        let best = comp
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let (ma, mb) = (&maxima.maxima[a], &maxima.maxima[b]);
                mb.value
                    .partial_cmp(&ma.value)
                    .expect("map values are finite")
                    .then((ma.row, ma.col).cmp(&(mb.row, mb.col)))
            })
            .expect("components are nonempty");
        let m = &maxima.maxima[best];
        points.push(map.pixel_to_window(m.col as f64, m.row as f64));
    }
    PointPattern::new(points, *map.window())
}
