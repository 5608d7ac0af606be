//! Multiscale fractal dimension from morphological covers.
//!
//! The series graph is dilated and eroded with a flat three-sample structuring
//! element, `s` times for scale `s`. The cover area `A(s)` sums the gap
//! between the upper and lower envelopes over the samples at least
//! `max_scale` from either end, so every scale sees the same support. The
//! local dimension is `D(s) = 2 - d ln A / d ln s`, with the derivative taken
//! as a least-squares slope over three neighbouring scales.

use serde::{Deserialize, Serialize};

use super::{ls_slope, mean, variance};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_SCALE: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MfdProfile {
    /// Scales `1..=max_scale`.
    pub scales: Vec<usize>,
    pub areas: Vec<f64>,
    /// Local dimension at each scale, clamped to [1, 2].
    pub dimensions: Vec<f64>,
    pub clamped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MfdSummary {
    pub fd1: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation across scales.
    pub std: f64,
}

fn dilate(src: &[f64], dst: &mut [f64]) {
    let n = src.len();
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        dst[i] = src[lo].max(src[i]).max(src[hi]);
    }
}

fn erode(src: &[f64], dst: &mut [f64]) {
    let n = src.len();
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        dst[i] = src[lo].min(src[i]).min(src[hi]);
    }
}

/// Cover areas `A(1..=max_scale)`.
pub fn cover_areas(x: &[f64], max_scale: usize) -> Vec<f64> {
    let n = x.len();
    let (lo, hi) = (max_scale, n - max_scale);
    let mut upper = x.to_vec();
    let mut lower = x.to_vec();
    let mut scratch = vec![0.0; n];
    let mut areas = Vec::with_capacity(max_scale);
    for _ in 0..max_scale {
        dilate(&upper, &mut scratch);
        std::mem::swap(&mut upper, &mut scratch);
        erode(&lower, &mut scratch);
        std::mem::swap(&mut lower, &mut scratch);
        areas.push((lo..hi).map(|i| upper[i] - lower[i]).sum());
    }
    areas
}

pub fn mfd_profile(x: &[f64], max_scale: usize) -> Result<MfdProfile> {
    if max_scale < 3 {
        return Err(Error::invalid("max scale must be at least 3"));
    }
    if x.len() < 4 * max_scale {
        return Err(Error::degenerate(format!(
            "{} samples are too few for scale {max_scale}",
            x.len()
        )));
    }
    let areas = cover_areas(x, max_scale);
    if !(areas[0] > 0.0) {
        return Err(Error::degenerate("flat series has no cover area"));
    }
    let ln_s: Vec<f64> = (1..=max_scale).map(|s| (s as f64).ln()).collect();
    let ln_a: Vec<f64> = areas.iter().map(|a| a.ln()).collect();
    let mut clamped = 0;
    let dimensions = (0..max_scale)
        .map(|i| {
            let start = i.saturating_sub(1).min(max_scale - 3);
            let r = start..start + 3;
            let d = 2.0 - ls_slope(&ln_s[r.clone()], &ln_a[r]);
            if !(1.0 - 1e-9..=2.0 + 1e-9).contains(&d) {
                clamped += 1;
            }
            d.clamp(1.0, 2.0)
        })
        .collect();
    Ok(MfdProfile {
        scales: (1..=max_scale).collect(),
        areas,
        dimensions,
        clamped,
    })
}

impl MfdProfile {
    pub fn summary(&self) -> MfdSummary {
        let d = &self.dimensions;
        MfdSummary {
            fd1: d[0],
            min: d.iter().copied().fold(f64::INFINITY, f64::min),
            max: d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: mean(d),
            std: variance(d).sqrt(),
        }
    }
}

pub fn mfd_summaries(x: &[f64], max_scale: usize) -> Result<MfdSummary> {
    Ok(mfd_profile(x, max_scale)?.summary())
}
