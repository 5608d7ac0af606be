//! RR stream cleaning.
//!
//! The watch reports RR at 5 Hz and repeats the last value until a new beat
//! is detected. Cleaning runs three steps in order:
//!
//! 1. runs of identical consecutive values collapse to their first report;
//! 2. intervals outside `[min_rr_ms, max_rr_ms]` are discarded;
//! 3. beats are rebuilt on a cumulative time base. When the next kept report
//!    arrives later than its own interval explains, the unexplained time is
//!    filled with interpolated beats, evenly spaced between the neighbouring
//!    valid beats, so elapsed time is conserved. Unexplained time longer than
//!    `max_fill_ms` is a recording break: no beats are invented and the time
//!    base re-anchors on the next report.

use serde::{Deserialize, Serialize};

use crate::model::{Beat, RawRRSample};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningParams {
    pub min_rr_ms: f64,
    pub max_rr_ms: f64,
    /// Longest stretch of unexplained time that is filled by interpolation.
    pub max_fill_ms: f64,
}

impl Default for CleaningParams {
    fn default() -> Self {
        Self {
            min_rr_ms: 300.0,
            max_rr_ms: 2000.0,
            max_fill_ms: 5000.0,
        }
    }
}

impl CleaningParams {
    pub fn in_range(&self, rr: f64) -> bool {
        rr >= self.min_rr_ms && rr <= self.max_rr_ms
    }
}

/// First report of every run of identical consecutive values.
pub fn drop_duplicates(raw: &[RawRRSample]) -> Vec<RawRRSample> {
    let mut out: Vec<RawRRSample> = Vec::with_capacity(raw.len() / 3 + 1);
    let mut last: Option<f64> = None;
    for s in raw {
        if last != Some(s.rr_ms) {
            out.push(*s);
        }
        last = Some(s.rr_ms);
    }
    out
}

/// Number of interpolated beats for `gap` ms of unexplained time, given the
/// previous interval. Every filled interval stays within the valid range.
fn fill_count(gap: f64, prev: f64, params: &CleaningParams) -> usize {
    let k = (gap / prev).round();
    if gap <= 0.0 || k < 1.0 {
        return 0;
    }
    let lo = (gap / params.max_rr_ms).ceil();
    let hi = (gap / params.min_rr_ms).floor();
    if hi < 1.0 || lo > hi {
        return 0;
    }
    k.clamp(lo, hi) as usize
}

/// Cleans a raw 5 Hz RR stream (sorted by timestamp) into beats.
///
/// Returns an empty vector when fewer than two valid reports remain.
pub fn clean_rr(raw: &[RawRRSample], params: &CleaningParams) -> Vec<Beat> {
    let kept: Vec<RawRRSample> = drop_duplicates(raw)
        .into_iter()
        .filter(|s| s.rr_ms.is_finite() && params.in_range(s.rr_ms))
        .collect();
    if kept.len() < 2 {
        return Vec::new();
    }

    let mut beats = Vec::with_capacity(kept.len() + kept.len() / 8);
    let mut t = kept[0].t_ms as f64;
    let mut prev = kept[0].rr_ms;
    beats.push(Beat {
        t_ms: t,
        rr_ms: prev,
    });

    for s in &kept[1..] {
        let reported = s.t_ms as f64;
        let gap = reported - t - s.rr_ms;
        if gap > params.max_fill_ms {
            t = reported;
        } else {
            let k = fill_count(gap, prev, params);
            if k > 0 {
                let step = gap / k as f64;
                let base = t;
                for i in 1..=k {
                    beats.push(Beat {
                        t_ms: base + step * i as f64,
                        rr_ms: step,
                    });
                }
                t = base + gap;
            }
            t += s.rr_ms;
        }
        prev = s.rr_ms;
        beats.push(Beat {
            t_ms: t,
            rr_ms: s.rr_ms,
        });
    }
    beats
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(pairs: &[(i64, f64)]) -> Vec<RawRRSample> {
        pairs
            .iter()
            .map(|&(t_ms, rr_ms)| RawRRSample { t_ms, rr_ms })
            .collect()
    }

    fn intervals(beats: &[Beat]) -> Vec<f64> {
        beats.iter().map(|b| b.rr_ms).collect()
    }

    #[test]
    fn duplicates_at_5hz_collapse() {
        let input = raw(&[(0, 800.0), (200, 800.0), (400, 800.0), (600, 820.0)]);
        let beats = clean_rr(&input, &CleaningParams::default());
        assert_eq!(intervals(&beats), vec![800.0, 820.0]);
        assert_eq!(beats[0].t_ms, 0.0);
        assert_eq!(beats[1].t_ms, 820.0);
    }

    #[test]
    fn long_interval_replaced_by_interpolated_beats() {
        // Beats reported at their own times; the 2500 ms interval is rejected.
        let input = raw(&[
            (0, 800.0),
            (810, 810.0),
            (3310, 2500.0),
            (4100, 790.0),
            (4900, 800.0),
        ]);
        let beats = clean_rr(&input, &CleaningParams::default());
        // Unexplained time before the 790 beat: 4100 - 810 - 790 = 2500 ms,
        // round(2500 / 810) = 3 beats of 833.33 ms each.
        let third = 2500.0 / 3.0;
        let expected = [800.0, 810.0, third, third, third, 790.0, 800.0];
        assert_eq!(beats.len(), expected.len());
        for (b, e) in beats.iter().zip(expected) {
            assert!((b.rr_ms - e).abs() < 1e-9, "{} vs {}", b.rr_ms, e);
        }
        let filled: f64 = beats[2..5].iter().map(|b| b.rr_ms).sum();
        assert!((filled - 2500.0).abs() < 1e-9);
        assert!(beats[2..5].iter().all(|b| (b.rr_ms - 800.0).abs() < 50.0));
        assert_eq!(beats[5].t_ms, 4100.0);
        assert_eq!(beats[6].t_ms, 4900.0);
    }

    #[test]
    fn short_and_long_values_rejected() {
        let input = raw(&[(0, 800.0), (800, 250.0), (1000, 2100.0), (1600, 800.5)]);
        let beats = clean_rr(&input, &CleaningParams::default());
        assert!(beats.iter().all(|b| b.rr_ms >= 300.0 && b.rr_ms <= 2000.0));
        // The rejected artifacts leave 799.5 ms unexplained, refilled as one beat.
        assert_eq!(intervals(&beats), vec![800.0, 799.5, 800.5]);
    }

    #[test]
    fn boundaries_are_inclusive() {
        let input = raw(&[(0, 300.0), (2000, 2000.0)]);
        let beats = clean_rr(&input, &CleaningParams::default());
        assert_eq!(intervals(&beats), vec![300.0, 2000.0]);
    }

    #[test]
    fn flatline_is_empty() {
        let input: Vec<RawRRSample> = (0..5000)
            .map(|i| RawRRSample {
                t_ms: i * 200,
                rr_ms: 750.0,
            })
            .collect();
        assert_eq!(drop_duplicates(&input).len(), 1);
        assert!(clean_rr(&input, &CleaningParams::default()).is_empty());
    }

    #[test]
    fn long_silence_is_not_filled() {
        let input = raw(&[(0, 800.0), (800, 810.0), (600_000, 790.0), (600_800, 800.0)]);
        let beats = clean_rr(&input, &CleaningParams::default());
        assert_eq!(intervals(&beats), vec![800.0, 810.0, 790.0, 800.0]);
        assert_eq!(beats[2].t_ms, 600_000.0);
    }

    #[test]
    fn repeated_true_value_is_restored() {
        // Two genuine consecutive 800 ms beats look like a duplicate; the
        // dropped beat comes back as an interpolated interval.
        let input = raw(&[(0, 790.0), (800, 800.0), (1600, 800.0), (2410, 810.0)]);
        let beats = clean_rr(&input, &CleaningParams::default());
        assert_eq!(intervals(&beats), vec![790.0, 800.0, 800.0, 810.0]);
    }

    /// Simulated device output: beats with random intervals, reported on a
    /// 5 Hz tick grid, with some artifacts substituted.
    fn device_stream(rrs: &[f64], artifacts: &[bool]) -> Vec<RawRRSample> {
        let mut beat_t = 0.0;
        let mut out = Vec::new();
        let mut current: Option<f64> = None;
        let mut i = 0;
        let mut tick = 0i64;
        let total: f64 = rrs.iter().sum();
        while (tick as f64) < total {
            while i < rrs.len() && beat_t + rrs[i] <= tick as f64 {
                beat_t += rrs[i];
                current = Some(if artifacts[i] { 2600.0 } else { rrs[i] });
                i += 1;
            }
            if let Some(v) = current {
                out.push(RawRRSample {
                    t_ms: tick,
                    rr_ms: v,
                });
            }
            tick += 200;
        }
        out
    }

    proptest! {
        #[test]
        fn output_invariants(
            rrs in prop::collection::vec(320u32..1900, 5..400),
            flags in prop::collection::vec(prop::bool::weighted(0.05), 400),
        ) {
            let rrs: Vec<f64> = rrs.into_iter().map(f64::from).collect();
            let stream = device_stream(&rrs, &flags[..rrs.len()]);
            let params = CleaningParams::default();
            let beats = clean_rr(&stream, &params);
            for pair in beats.windows(2) {
                prop_assert!(pair[1].t_ms > pair[0].t_ms);
            }
            for b in &beats {
                prop_assert!(params.in_range(b.rr_ms), "interval {}", b.rr_ms);
            }
            // deterministic
            prop_assert_eq!(clean_rr(&stream, &params), beats);
        }

        #[test]
        fn cleaning_twice_equals_once(
            rrs in prop::collection::vec(320u32..1900, 5..400),
            flags in prop::collection::vec(prop::bool::weighted(0.05), 400),
        ) {
            let rrs: Vec<f64> = rrs.into_iter().map(f64::from).collect();
            let stream = device_stream(&rrs, &flags[..rrs.len()]);
            let params = CleaningParams::default();
            let once = clean_rr(&stream, &params);
            // Feed the cleaned beats back as one report per beat.
            let again: Vec<RawRRSample> = once
                .iter()
                .map(|b| RawRRSample { t_ms: b.t_ms.round() as i64, rr_ms: b.rr_ms })
                .collect();
            let twice = clean_rr(&again, &params);
            prop_assert_eq!(once.len(), twice.len());
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a.rr_ms - b.rr_ms).abs() <= 1.0, "{} vs {}", a.rr_ms, b.rr_ms);
                prop_assert!((a.t_ms - b.t_ms).abs() <= 1.0);
            }
        }
    }
}
