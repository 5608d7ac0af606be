//! Frequency-band power of a periodogram.

use serde::{Deserialize, Serialize};

use super::lomb::Periodogram;
use crate::error::{Error, Result};

pub const LF_BAND: (f64, f64) = (0.04, 0.15);
pub const HF_BAND: (f64, f64) = (0.15, 0.40);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPowers {
    /// Absolute LF and HF power (trapezoidal integral).
    pub lf: f64,
    pub hf: f64,
    /// Integral over the whole periodogram.
    pub total: f64,
    /// Fractions of total power.
    pub lf_rel: f64,
    pub hf_rel: f64,
    /// Normalized units: `lf / (lf + hf)` and `hf / (lf + hf)`.
    pub lf_norm: f64,
    pub hf_norm: f64,
    /// `None` when HF power is zero.
    pub lf_hf_ratio: Option<f64>,
}

/// Trapezoidal integral of the periodogram over grid points inside `[lo, hi]`.
pub fn integrate_band(pg: &Periodogram, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    let pts: Vec<(f64, f64)> = pg
        .frequencies
        .iter()
        .zip(&pg.power)
        .filter(|(f, _)| **f >= lo && **f <= hi)
        .map(|(f, p)| (*f, *p))
        .collect();
    for w in pts.windows(2) {
        total += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
    }
    total
}

pub fn band_powers(pg: &Periodogram) -> Result<BandPowers> {
    let (Some(&first), Some(&last)) = (pg.frequencies.first(), pg.frequencies.last()) else {
        return Err(Error::degenerate("empty periodogram"));
    };
    let lf = integrate_band(pg, LF_BAND.0, LF_BAND.1);
    let hf = integrate_band(pg, HF_BAND.0, HF_BAND.1);
    let total = integrate_band(pg, first, last);
    if !(lf + hf > 0.0) || !(total > 0.0) {
        return Err(Error::degenerate("no power in the LF and HF bands"));
    }
    Ok(BandPowers {
        lf,
        hf,
        total,
        lf_rel: lf / total,
        hf_rel: hf / total,
        lf_norm: lf / (lf + hf),
        hf_norm: hf / (lf + hf),
        lf_hf_ratio: (hf > 0.0).then(|| lf / hf),
    })
}
