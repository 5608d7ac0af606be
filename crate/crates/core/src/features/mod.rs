//! Per-window feature measures.

pub mod bands;
pub mod energy;
pub mod higuchi;
pub mod lomb;
pub mod mfd;
mod nufft;
pub mod poincare;
pub mod sampen;

pub use bands::{band_powers, BandPowers};
pub use energy::short_time_energy;
pub use higuchi::higuchi_fd;
pub use lomb::{lomb_scargle, FrequencyGrid, LombScargle, Periodogram};
pub use mfd::{mfd_profile, mfd_summaries, MfdProfile, MfdSummary};
pub use poincare::{poincare, Poincare};
pub use sampen::{match_counts, sample_entropy, SampEnCounts, Tolerance};

/// A dimension estimate together with whether it had to be clamped into [1, 2].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FractalEstimate {
    pub value: f64,
    /// Unclamped regression estimate.
    pub raw: f64,
    pub clamped: bool,
}

impl FractalEstimate {
    pub(crate) fn from_raw(raw: f64) -> Self {
        let value = raw.clamp(1.0, 2.0);
        Self {
            value,
            raw,
            clamped: value != raw,
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub(crate) fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub(crate) fn is_constant(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}
