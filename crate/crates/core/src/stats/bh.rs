//! Benjamini-Hochberg step-up adjustment.

use crate::error::{Error, Result};

/// Adjusted p-values in input order: `min_{j >= i} (m / j) p_(j)`, capped at 1.
pub fn benjamini_hochberg(p: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("p-value {bad} outside [0, 1]")));
    }
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]).then(i.cmp(&j)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        let value = (p[i] * m as f64 / (rank + 1) as f64).max(p[i]);
        running = running.min(value);
        adjusted[i] = running.min(1.0);
    }
    Ok(adjusted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Definition applied directly, O(m^2).
    fn oracle(p: &[f64]) -> Vec<f64> {
        let m = p.len();
        let mut sorted: Vec<f64> = p.to_vec();
        sorted.sort_by(f64::total_cmp);
        p.iter()
            .map(|&v| {
                let i = sorted.iter().rposition(|&s| s == v).unwrap();
                (i..m)
                    .map(|j| sorted[j] * m as f64 / (j + 1) as f64)
                    .fold(f64::INFINITY, f64::min)
                    .min(1.0)
            })
            .collect()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(benjamini_hochberg(&[0.03]).unwrap(), vec![0.03]);
        assert_eq!(
            benjamini_hochberg(&[0.01, 0.02, 0.03, 0.04]).unwrap(),
            vec![0.04; 4]
        );
        assert_eq!(benjamini_hochberg(&[0.001, 0.9]).unwrap(), vec![0.002, 0.9]);
        assert!(benjamini_hochberg(&[]).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(benjamini_hochberg(&[0.5, 1.2]).is_err());
        assert!(benjamini_hochberg(&[-0.1]).is_err());
        assert!(benjamini_hochberg(&[f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn matches_definition(p in prop::collection::vec(0f64..=1.0, 1..50)) {
            let got = benjamini_hochberg(&p).unwrap();
            for ((g, e), raw) in got.iter().zip(oracle(&p)).zip(&p) {
                prop_assert!((g - e).abs() <= 1e-12);
                prop_assert!(*g >= *raw && *g <= 1.0);
            }
        }

        #[test]
        fn monotone_in_sorted_order(mut p in prop::collection::vec(0f64..=1.0, 1..50)) {
            p.sort_by(f64::total_cmp);
            let adj = benjamini_hochberg(&p).unwrap();
            for w in adj.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
