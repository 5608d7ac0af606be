use crate::error::{Error, Result};
use crate::model::MotionWindow;

/// Short-time energy: mean squared euclidean norm per sample.
///
/// Requires at least `min_fraction` of the window's nominal sample count.
pub fn short_time_energy(window: &MotionWindow<'_>, min_fraction: f64) -> Result<f64> {
    if !window.is_valid(min_fraction) {
        return Err(Error::InvalidWindow(format!(
            "{} window at {} has {} of {} expected samples",
            window.sensor.as_str(),
            window.window_start,
            window.samples.len(),
            window.expected_count
        )));
    }
    let total: f64 = window.samples.iter().map(|s| s.norm_sq()).sum();
    Ok(total / window.samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use std::borrow::Cow;

    use super::*;
    use crate::model::{RawSample, Sensor};
    use proptest::prelude::*;

    fn window(samples: Vec<RawSample>) -> MotionWindow<'static> {
        MotionWindow {
            sensor: Sensor::Acc,
            samples: Cow::Owned(samples),
            window_start: 0,
            window_len_ms: 600_000,
            expected_count: 12_000,
        }
    }

    fn constant(x: f64, y: f64, z: f64, n: usize) -> Vec<RawSample> {
        (0..n)
            .map(|i| RawSample {
                t_ms: i as i64 * 50,
                x,
                y,
                z,
            })
            .collect()
    }

    #[test]
    fn zero_signal() {
        assert_eq!(
            short_time_energy(&window(constant(0.0, 0.0, 0.0, 12_000)), 0.9).unwrap(),
            0.0
        );
    }

    #[test]
    fn unit_norm() {
        assert_eq!(
            short_time_energy(&window(constant(1.0, 0.0, 0.0, 12_000)), 0.9).unwrap(),
            1.0
        );
    }

    #[test]
    fn alternating_norms_average() {
        let samples = (0..12_000)
            .map(|i| {
                let x = if i % 2 == 0 { 1.0 } else { 3f64.sqrt() };
                RawSample {
                    t_ms: i * 50,
                    x,
                    y: 0.0,
                    z: 0.0,
                }
            })
            .collect();
        let e = short_time_energy(&window(samples), 0.9).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_and_empty_windows_rejected() {
        assert!(short_time_energy(&window(constant(1.0, 0.0, 0.0, 10_799)), 0.9).is_err());
        assert!(short_time_energy(&window(constant(1.0, 0.0, 0.0, 10_800)), 0.9).is_ok());
        assert!(short_time_energy(&window(vec![]), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn rotation_invariant_and_quadratic(
            v in prop::collection::vec((-20f64..20.0, -20f64..20.0, -20f64..20.0), 100),
            angle in 0f64..std::f64::consts::TAU,
            c in -5f64..5.0,
        ) {
            let base: Vec<RawSample> = v.iter().enumerate()
                .map(|(i, &(x, y, z))| RawSample { t_ms: i as i64, x, y, z }).collect();
            let (s, co) = angle.sin_cos();
            let rotated: Vec<RawSample> = base.iter()
                .map(|p| RawSample { t_ms: p.t_ms, x: co * p.x - s * p.y, y: s * p.x + co * p.y, z: p.z }).collect();
            let scaled: Vec<RawSample> = base.iter()
                .map(|p| RawSample { t_ms: p.t_ms, x: c * p.x, y: c * p.y, z: c * p.z }).collect();
            let mk = |s: Vec<RawSample>| MotionWindow { sensor: Sensor::Gyr, samples: Cow::Owned(s), window_start: 0, window_len_ms: 5_000, expected_count: 100 };
            let e0 = short_time_energy(&mk(base), 0.9).unwrap();
            let e1 = short_time_energy(&mk(rotated), 0.9).unwrap();
            let e2 = short_time_energy(&mk(scaled), 0.9).unwrap();
            prop_assert!((e0 - e1).abs() <= 1e-9 * e0.max(1.0));
            prop_assert!((e2 - c * c * e0).abs() <= 1e-9 * (c * c * e0).max(1.0));
        }
    }
}
