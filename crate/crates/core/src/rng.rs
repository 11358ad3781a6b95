//! Seedable random number generation with a pinned, documented algorithm.
//!
//! Simulation outputs must be reproducible bit-for-bit across platforms and
//! releases, so the generator is implemented here rather than delegated to a
//! crate whose stream may change between versions. The algorithm identity is
//! recorded in simulation metadata as [`ALGORITHM_ID`].
//!
//! - State generator: xoshiro256** (Blackman & Vigna), seeded by expanding a
//!   `u64` seed through splitmix64.
//! - Uniform doubles: the top 53 bits of the next state word, scaled to
//!   `[0, 1)`.
//! - Poisson counts: Knuth's multiplication method applied to chunks of mean
//!   at most 16, summed (a Poisson sum of Poisson chunks is exact).

/// Identifier of the generation scheme, recorded in output metadata.
pub const ALGORITHM_ID: &str = "xoshiro256ss/splitmix64-seed/knuth-chunk-poisson-v1";

/// xoshiro256** generator.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

impl Rng {
    /// Expands `seed` through splitmix64 into the full 256-bit state.
    pub fn seed_from(seed: u64) -> Self {
        let mut sm = seed;
        let mut next = || {
            sm = sm.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = sm;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        Self {
            state: [next(), next(), next(), next()],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Poisson count with the given mean.
    ///
    /// Knuth's product method underflows for large means, so the mean is split
    /// into chunks of at most 16 whose counts are summed.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(
            mean.is_finite() && mean >= 0.0,
            "poisson mean must be >= 0, got {mean}"
        );
        let mut remaining = mean;
        let mut total = 0u64;
        while remaining > 0.0 {
            let chunk = remaining.min(16.0);
            remaining -= chunk;
            let limit = (-chunk).exp();
            let mut product = 1.0;
            loop {
                product *= self.next_f64();
                if product <= limit {
                    break;
                }
                total += 1;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_stream_is_pinned() {
        // Frozen first outputs for seed 0; guards against accidental changes
        // to the generator, which would silently break every recorded seed.
        let mut rng = Rng::seed_from(0);
        let first: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(
            first,
            vec![
                11091344671253066420,
                13793997310169335082,
                1900383378846508768,
                7684712102626143532
            ]
        );
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::seed_from(42);
        let mut b = Rng::seed_from(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::seed_from(43);
        assert_ne!(Rng::seed_from(42).next_u64(), c.next_u64());
    }

    #[test]
    fn uniform_range_and_mean() {
        let mut rng = Rng::seed_from(7);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        // 3 sigma band around 1/2, sigma = 1/sqrt(12 n)
        assert!((mean - 0.5).abs() < 3.0 / (12.0 * n as f64).sqrt());
    }

    #[test]
    fn poisson_moments() {
        let mut rng = Rng::seed_from(11);
        for &mean in &[0.3, 4.0, 40.0, 400.0] {
            let n = 4000;
            let mut sum = 0.0;
            for _ in 0..n {
                sum += rng.poisson(mean) as f64;
            }
            let est = sum / n as f64;
            let se = (mean / n as f64).sqrt();
            assert!(
                (est - mean).abs() < 4.0 * se,
                "mean {mean}: estimate {est} off by more than 4 se ({se})"
            );
        }
    }

    #[test]
    fn poisson_zero_mean() {
        let mut rng = Rng::seed_from(13);
        assert_eq!(rng.poisson(0.0), 0);
    }
}
