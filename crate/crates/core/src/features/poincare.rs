//! Poincaré plot descriptors.

use serde::{Deserialize, Serialize};

use super::variance;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poincare {
    pub sd1: f64,
    pub sd2: f64,
    /// Set when `2 var(x) - var(diff) / 2` came out negative and SD2 was set to 0.
    pub sd2_clamped: bool,
}

/// SD1 and SD2 from population variances of the intervals and their differences.
pub fn poincare(x: &[f64]) -> Result<Poincare> {
    if x.len() < 2 {
        return Err(Error::degenerate(format!(
            "{} intervals are too few",
            x.len()
        )));
    }
    let diffs: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let var_d = variance(&diffs);
    let var_x = variance(x);
    let sd1 = (var_d / 2.0).sqrt();
    let inner = 2.0 * var_x - var_d / 2.0;
    Ok(Poincare {
        sd1,
        sd2: inner.max(0.0).sqrt(),
        sd2_clamped: inner < 0.0,
    })
}
