//! Sample entropy.
//!
//! Both template lengths use the same `N - m` starting points, matches use
//! the Chebyshev distance `<= r` and self-matches are excluded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Tolerance {
    Absolute(f64),
    /// Multiple of the series' population standard deviation.
    StdFraction(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::StdFraction(0.2)
    }
}

impl Tolerance {
    pub fn resolve(&self, x: &[f64]) -> f64 {
        match *self {
            Tolerance::Absolute(r) => r,
            Tolerance::StdFraction(f) => f * super::variance(x).sqrt(),
        }
    }
}

/// Matching template pairs of length `m` (`b`) and `m + 1` (`a`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SampEnCounts {
    pub a: u64,
    pub b: u64,
}

impl SampEnCounts {
    /// `-ln(A / B)`; infinite when no pair of length `m + 1` matches.
    pub fn entropy(&self) -> f64 {
        if self.a == 0 || self.b == 0 {
            f64::INFINITY
        } else {
            -((self.a as f64) / (self.b as f64)).ln()
        }
    }
}

/// Counts matching template pairs with tolerance `r`.
///
/// Templates are sorted by their first value so each scan stops once the
/// first coordinates are further than `r` apart.
pub fn match_counts(x: &[f64], m: usize, r: f64) -> SampEnCounts {
    let n = x.len();
    if m == 0 || n <= m {
        return SampEnCounts::default();
    }
    let templates = n - m;
    let mut order: Vec<usize> = (0..templates).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
    let cols: Vec<Vec<f64>> = (0..=m)
        .map(|k| order.iter().map(|&i| x[i + k]).collect())
        .collect();
    let first = &cols[0];
    let last = &cols[m];
    let mut counts = SampEnCounts::default();
    for p in 0..templates {
        let v0 = first[p];
        for q in p + 1..templates {
            if first[q] - v0 > r {
                break;
            }
            if (1..m).all(|k| (cols[k][q] - cols[k][p]).abs() <= r) {
                counts.b += 1;
                if (last[q] - last[p]).abs() <= r {
                    counts.a += 1;
                }
            }
        }
    }
    counts
}

/// Sample entropy with embedding dimension `m`.
pub fn sample_entropy(x: &[f64], m: usize, tolerance: Tolerance) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("embedding dimension must be positive"));
    }
    if x.len() < m + 2 {
        return Err(Error::degenerate(format!(
            "{} samples are too few for m = {m}",
            x.len()
        )));
    }
    if super::is_constant(x) && matches!(tolerance, Tolerance::StdFraction(_)) {
        return Err(Error::degenerate("zero-variance series"));
    }
    let r = tolerance.resolve(x);
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("bad tolerance {r}")));
    }
    Ok(match_counts(x, m, r).entropy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct O(N^2) counts.
    fn naive(x: &[f64], m: usize, r: f64) -> SampEnCounts {
        let n = x.len();
        let t = n - m;
        let mut c = SampEnCounts::default();
        for i in 0..t {
            for j in i + 1..t {
                if (0..m).all(|k| (x[i + k] - x[j + k]).abs() <= r) {
                    c.b += 1;
                    if (x[i + m] - x[j + m]).abs() <= r {
                        c.a += 1;
                    }
                }
            }
        }
        c
    }

    #[test]
    fn hand_counted_example() {
        let x = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        let c = match_counts(&x, 2, 0.5);
        // four length-2 templates: pairs (0,2) and (1,3) match, both extend.
        assert_eq!(c, SampEnCounts { a: 2, b: 2 });
        assert_eq!(c.entropy(), 0.0);
    }

    #[test]
    fn tiny_slope_within_tolerance_is_zero() {
        let x: Vec<f64> = (0..100).map(|i| 5.0 + 1e-6 * i as f64).collect();
        assert_eq!(
            sample_entropy(&x, 2, Tolerance::Absolute(1.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn alternating_series_is_zero() {
        let x: Vec<f64> = (0..300)
            .map(|i| if i % 2 == 0 { 700.0 } else { 900.0 })
            .collect();
        let c = match_counts(&x, 2, 50.0);
        assert_eq!(c, naive(&x, 2, 50.0));
        assert_eq!(c.entropy(), 0.0);
    }

    #[test]
    fn long_series_match_naive_for_each_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: Vec<f64> = (0..2000).map(|_| rng.random_range(600.0..1000.0)).collect();
        for m in 1..=3 {
            let r = Tolerance::default().resolve(&x);
            assert_eq!(match_counts(&x, m, r), naive(&x, m, r));
        }
    }

    #[test]
    fn shift_invariant_exactly_on_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x: Vec<f64> = (0..500)
            .map(|_| rng.random_range(600..1000) as f64)
            .collect();
        let y: Vec<f64> = x.iter().map(|v| v + 128.0).collect();
        assert_eq!(
            sample_entropy(&x, 2, Tolerance::Absolute(20.0)).unwrap(),
            sample_entropy(&y, 2, Tolerance::Absolute(20.0)).unwrap()
        );
    }

    #[test]
    fn white_noise_matches_analytic_value() {
        // For iid uniform(0,1) data and absolute r, the probability that two
        // points are within r is p = 2r - r^2, so SampEn -> -ln p.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let r = 0.2;
        let s = sample_entropy(&x, 2, Tolerance::Absolute(r)).unwrap();
        let expected = -(2.0 * r - r * r).ln();
        assert!((s - expected).abs() < 0.05, "{s} vs {expected}");
    }

    #[test]
    fn regular_signal_lower_than_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sine: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.3).sin()).collect();
        let noise: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let a = sample_entropy(&sine, 2, Tolerance::default()).unwrap();
        let b = sample_entropy(&noise, 2, Tolerance::default()).unwrap();
        assert!(a < b);
    }

    #[test]
    fn no_matches_is_infinite() {
        let x: Vec<f64> = (0..50).map(|i| (i * i) as f64).collect();
        assert_eq!(
            sample_entropy(&x, 2, Tolerance::Absolute(0.1)).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            sample_entropy(&[5.0; 100], 2, Tolerance::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(sample_entropy(&[1.0, 2.0, 3.0], 2, Tolerance::default()).is_err());
    }

    proptest! {
        #[test]
        fn sorted_scan_equals_naive(
            x in prop::collection::vec(0u8..12, 3..120),
            m in 1usize..4,
            r in 0u8..4,
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            prop_assume!(x.len() > m);
            let r = f64::from(r);
            prop_assert_eq!(match_counts(&x, m, r), naive(&x, m, r));
        }

        #[test]
        fn sorted_scan_equals_naive_real(
            x in prop::collection::vec(-3f64..3.0, 3..200),
            r in 0f64..1.5,
        ) {
            prop_assert_eq!(match_counts(&x, 2, r), naive(&x, 2, r));
        }

        #[test]
        fn scale_and_shift_invariant(
            x in prop::collection::vec(-3f64..3.0, 20..150),
            a in 0.5f64..4.0,
            b in -100f64..100.0,
        ) {
            prop_assume!(!crate::features::is_constant(&x));
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let s = sample_entropy(&x, 2, Tolerance::default()).unwrap();
            let t = sample_entropy(&y, 2, Tolerance::default()).unwrap();
            // floating-point rounding may move pairs sitting exactly at r
            let c0 = match_counts(&x, 2, Tolerance::default().resolve(&x));
            let c1 = match_counts(&y, 2, Tolerance::default().resolve(&y));
            let diff = (c0.a as i64 - c1.a as i64).abs() + (c0.b as i64 - c1.b as i64).abs();
            if diff == 0 {
                prop_assert!(s == t || (s - t).abs() < 1e-12);
            }
        }

        #[test]
        fn nonnegative(x in prop::collection::vec(-3f64..3.0, 20..150)) {
            prop_assume!(!crate::features::is_constant(&x));
            let s = sample_entropy(&x, 2, Tolerance::default()).unwrap();
            prop_assert!(s >= 0.0);
        }
    }
}
