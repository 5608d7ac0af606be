//! Higuchi fractal dimension.

use super::{ls_slope, FractalEstimate};
use crate::error::{Error, Result};

pub const DEFAULT_KMAX: usize = 10;

/// Mean normalized curve length `L(k)` for `k = 1..=kmax`.
pub fn curve_lengths(x: &[f64], kmax: usize) -> Vec<f64> {
    let n = x.len();
    (1..=kmax)
        .map(|k| {
            let mut total = 0.0;
            let mut used = 0usize;
            for m in 0..k {
                let count = (n - 1 - m) / k;
                if count == 0 {
                    continue;
                }
                let mut len = 0.0;
                for i in 1..=count {
                    len += (x[m + i * k] - x[m + (i - 1) * k]).abs();
                }
                total += len * (n - 1) as f64 / (count * k) as f64 / k as f64;
                used += 1;
            }
            total / used as f64
        })
        .collect()
}

/// Slope of `ln L(k)` against `ln(1/k)`, clamped to [1, 2].
pub fn higuchi_fd(x: &[f64], kmax: usize) -> Result<FractalEstimate> {
    if kmax < 2 {
        return Err(Error::invalid("kmax must be at least 2"));
    }
    if x.len() < 10 * kmax {
        return Err(Error::degenerate(format!(
            "{} samples are too few for kmax = {kmax}",
            x.len()
        )));
    }
    if super::is_constant(x) {
        return Err(Error::degenerate("constant series has no curve length"));
    }
    let lengths = curve_lengths(x, kmax);
    if lengths.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::degenerate("zero curve length at some scale"));
    }
    let lx: Vec<f64> = (1..=kmax).map(|k| -(k as f64).ln()).collect();
    let ly: Vec<f64> = lengths.iter().map(|l| l.ln()).collect();
    Ok(FractalEstimate::from_raw(ls_slope(&lx, &ly)))
}
