//! Lomb-Scargle periodogram of unevenly sampled RR intervals.
//!
//! The classic normalization is used: the mean is removed and power is divided
//! by twice the sample variance, so for evenly spaced data the periodogram
//! equals `|DFT|^2 / (N sigma^2)` at the Fourier frequencies.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::nufft::Nufft;
use crate::error::{Error, Result};
use crate::model::RRSeries;

/// Evenly spaced frequencies `k * df` for `k` in `k_lo..=k_hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub df: f64,
    pub k_lo: usize,
    pub k_hi: usize,
}

impl FrequencyGrid {
    /// Grid spanning `[f_min, f_max]` with spacing `1 / (oversampling * span_s)`.
    pub fn new(span_s: f64, oversampling: f64, f_min: f64, f_max: f64) -> Result<Self> {
        if !(span_s > 0.0 && oversampling > 0.0 && f_max > f_min && f_min >= 0.0) {
            return Err(Error::invalid(format!(
                "bad frequency grid: span {span_s} s, oversampling {oversampling}, [{f_min}, {f_max}] Hz"
            )));
        }
        let df = 1.0 / (oversampling * span_s);
        let k_lo = ((f_min / df).floor() as usize).max(1);
        let k_hi = ((f_max / df).ceil() as usize).max(k_lo);
        Ok(Self { df, k_lo, k_hi })
    }

    /// Default HRV grid for a window of `span_s` seconds: 0.003-0.40 Hz,
    /// oversampled four times.
    pub fn hrv(span_s: f64) -> Result<Self> {
        Self::new(span_s, 4.0, 0.003, 0.40)
    }

    pub fn len(&self) -> usize {
        self.k_hi - self.k_lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (self.k_lo..=self.k_hi)
            .map(|k| k as f64 * self.df)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

/// Reusable periodogram evaluator for one frequency grid.
pub struct LombScargle {
    grid: FrequencyGrid,
    plan: Nufft,
}

impl LombScargle {
    pub fn new(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            plan: Nufft::new(2 * grid.k_hi),
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Periodogram of samples `y` taken at times `t` (seconds).
    pub fn periodogram(&self, t: &[f64], y: &[f64]) -> Result<Periodogram> {
        if t.len() != y.len() {
            return Err(Error::invalid("time and value lengths differ"));
        }
        let n = y.len();
        if n < 3 {
            return Err(Error::degenerate(format!(
                "{n} samples are too few for a periodogram"
            )));
        }
        if super::is_constant(y) {
            return Err(Error::degenerate("constant series has no spectrum"));
        }
        let mean = super::mean(y);
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let t0 = t.iter().copied().fold(f64::INFINITY, f64::min);
        let omega0 = std::f64::consts::TAU * self.grid.df;
        let phases: Vec<f64> = t.iter().map(|&ti| omega0 * (ti - t0)).collect();
        let weights: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v - mean, 1.0)).collect();
        let spec = self.plan.type1(&phases, &weights);

        let nf = n as f64;
        let mut power = Vec::with_capacity(self.grid.len());
        for k in self.grid.k_lo..=self.grid.k_hi {
            let k = k as i64;
            // Split the transform of (y + i) into the transforms of y and 1.
            let (fk, fmk) = (spec.at(k), spec.at(-k).conj());
            let sy = (fk + fmk) * 0.5;
            let (f2k, fm2k) = (spec.at(2 * k), spec.at(-2 * k).conj());
            let s1 = (f2k - fm2k) * Complex64::new(0.0, -0.5);
            let (yc, ys) = (sy.re, -sy.im);
            let (c2, s2) = (s1.re, -s1.im);

            let hyp = c2.hypot(s2);
            let two_wt = s2.atan2(c2);
            let (sin_wt, cos_wt) = (0.5 * two_wt).sin_cos();
            let cc = 0.5 * (nf + hyp);
            let ss = 0.5 * (nf - hyp);
            let yct = yc * cos_wt + ys * sin_wt;
            let yst = ys * cos_wt - yc * sin_wt;
            let tiny = 1e-12 * nf;
            let mut p = 0.0;
            if cc > tiny {
                p += yct * yct / cc;
            }
            if ss > tiny {
                p += yst * yst / ss;
            }
            power.push(p / (2.0 * var));
        }
        Ok(Periodogram {
            frequencies: self.grid.frequencies(),
            power,
        })
    }

    /// Periodogram of an RR series: interval values against beat times.
    pub fn of_series(&self, rr: &RRSeries) -> Result<Periodogram> {
        self.periodogram(&rr.beat_times, &rr.intervals)
    }
}

/// One-shot periodogram of an RR series on `grid`.
pub fn lomb_scargle(rr: &RRSeries, grid: FrequencyGrid) -> Result<Periodogram> {
    LombScargle::new(grid).of_series(rr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rustfft::FftPlanner;
    use std::f64::consts::TAU;

    /// Direct textbook evaluation.
    fn direct(t: &[f64], y: &[f64], freqs: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        freqs
            .iter()
            .map(|&f| {
                let w = TAU * f;
                let (s2, c2) = t.iter().fold((0.0, 0.0), |(s, c), &ti| {
                    (s + (2.0 * w * ti).sin(), c + (2.0 * w * ti).cos())
                });
                let tau = s2.atan2(c2) / (2.0 * w);
                let (mut yc, mut ys, mut cc, mut ss) = (0.0, 0.0, 0.0, 0.0);
                for (&ti, &yi) in t.iter().zip(y) {
                    let a = w * (ti - tau);
                    yc += (yi - mean) * a.cos();
                    ys += (yi - mean) * a.sin();
                    cc += a.cos().powi(2);
                    ss += a.sin().powi(2);
                }
                (yc * yc / cc + ys * ys / ss) / (2.0 * var)
            })
            .collect()
    }

    #[test]
    fn uniform_sampling_matches_fft_periodogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 512usize;
        let dt = 1.0;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| {
                800.0
                    + 30.0 * (TAU * 0.1 * ti).sin()
                    + 15.0 * (TAU * 0.25 * ti + 0.3).cos()
                    + rng.random_range(-5.0..5.0)
            })
            .collect();
        let span = n as f64 * dt;
        // Oversampling 1 puts the grid on the Fourier frequencies j / (N dt).
        let grid = FrequencyGrid::new(span, 1.0, 0.003, 0.40).unwrap();
        let ls = LombScargle::new(grid);
        let pg = ls.periodogram(&t, &y).unwrap();

        let mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        for (i, k) in (grid.k_lo..=grid.k_hi).enumerate() {
            if k == n / 2 {
                continue;
            }
            let expected = buf[k].norm_sqr() / (n as f64 * var);
            let got = pg.power[i];
            assert!(
                (got - expected).abs() <= 1e-6 * expected.max(1e-3),
                "k={k}: {got} vs {expected}"
            );
        }
        // peaks at the planted tones
        let argmax = |lo: f64, hi: f64| {
            pg.frequencies
                .iter()
                .zip(&pg.power)
                .filter(|(f, _)| **f >= lo && **f <= hi)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(f, _)| *f)
                .unwrap()
        };
        assert!((argmax(0.04, 0.15) - 0.1).abs() < 2.0 / span);
        assert!((argmax(0.15, 0.40) - 0.25).abs() < 2.0 / span);
    }

    #[test]
    fn irregular_sampling_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = Vec::new();
        let mut acc = 0.0;
        while acc < 600.0 {
            acc += rng.random_range(0.5..1.2);
            t.push(acc);
        }
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| 900.0 + 40.0 * (TAU * 0.12 * ti).sin() + rng.random_range(-10.0..10.0))
            .collect();
        let grid = FrequencyGrid::hrv(600.0).unwrap();
        let pg = LombScargle::new(grid).periodogram(&t, &y).unwrap();
        let expected = direct(&t, &y, &pg.frequencies);
        let peak = expected.iter().copied().fold(0.0, f64::max);
        for (g, e) in pg.power.iter().zip(&expected) {
            assert!((g - e).abs() <= 1e-8 * peak, "{g} vs {e}");
        }
    }

    #[test]
    fn time_shift_invariant() {
        let t: Vec<f64> = (0..200)
            .map(|i| i as f64 * 0.8 + (i % 7) as f64 * 0.05)
            .collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| (TAU * 0.2 * ti).sin() + 0.1 * ti.cos())
            .collect();
        let shifted: Vec<f64> = t.iter().map(|ti| ti + 1234.5).collect();
        let ls = LombScargle::new(FrequencyGrid::hrv(160.0).unwrap());
        let a = ls.periodogram(&t, &y).unwrap();
        let b = ls.periodogram(&shifted, &y).unwrap();
        for (p, q) in a.power.iter().zip(&b.power) {
            assert!((p - q).abs() < 1e-9 * p.max(1.0));
        }
    }

    #[test]
    fn single_tone_peak_location() {
        let t: Vec<f64> = (0..3600).map(|i| i as f64).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| 800.0 + 25.0 * (TAU * 0.1 * ti).sin())
            .collect();
        let grid = FrequencyGrid::hrv(3600.0).unwrap();
        let pg = LombScargle::new(grid).periodogram(&t, &y).unwrap();
        let (peak, _) = pg
            .frequencies
            .iter()
            .zip(&pg.power)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let nearest = (0.1 / grid.df).round() * grid.df;
        assert!((peak - nearest).abs() < 1e-12, "{peak} vs {nearest}");
    }

    #[test]
    fn offset_invariant() {
        let t: Vec<f64> = (0..500)
            .map(|i| i as f64 * 0.9 + (i % 3) as f64 * 0.1)
            .collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| (TAU * 0.27 * ti).sin() + 0.2 * (TAU * 0.07 * ti).cos())
            .collect();
        let y2: Vec<f64> = y.iter().map(|v| v + 950.0).collect();
        let ls = LombScargle::new(FrequencyGrid::hrv(450.0).unwrap());
        let a = ls.periodogram(&t, &y).unwrap();
        let b = ls.periodogram(&t, &y2).unwrap();
        for (p, q) in a.power.iter().zip(&b.power) {
            assert!((p - q).abs() < 1e-6 * p.max(1e-3));
        }
    }

    #[test]
    fn constant_series_is_degenerate() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.8).collect();
        let y = vec![800.0; 100];
        let ls = LombScargle::new(FrequencyGrid::hrv(80.0).unwrap());
        assert!(matches!(ls.periodogram(&t, &y), Err(Error::Degenerate(_))));
    }

    #[test]
    fn hrv_grid_bounds() {
        let g = FrequencyGrid::hrv(3600.0).unwrap();
        assert!((g.df - 1.0 / 14_400.0).abs() < 1e-18);
        assert!(g.k_lo as f64 * g.df <= 0.003);
        assert!(g.k_hi as f64 * g.df >= 0.40);
    }
}
