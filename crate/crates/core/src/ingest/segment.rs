//! Clock-aligned windowing of cleaned streams.
//!
//! The grid starts at the subject's first full local-time hour. Motion is cut
//! into 10-minute windows and HRV into 1-hour windows; only windows holding
//! data are emitted. Windows touching an exclusion range are dropped, and each
//! window is tagged asleep when at least half of it overlaps sleep.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::model::{
    expected_count, Beat, InvalidReason, MotionWindow, RRSeries, RawSample, Sensor, SleepSchedule,
    State, StepRecord,
};
use crate::time::{LocalZone, TimeRange, HOUR_MS, MINUTE_MS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowParams {
    pub motion_window_ms: i64,
    pub hrv_window_ms: i64,
    /// Share of nominal motion samples a window needs to be valid.
    pub min_motion_fraction: f64,
    /// Share of the HRV window the cleaned intervals must cover.
    pub min_rr_coverage: f64,
    /// Share of a window overlapping sleep for it to count as asleep.
    pub asleep_fraction: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self {
            motion_window_ms: 10 * MINUTE_MS,
            hrv_window_ms: HOUR_MS,
            min_motion_fraction: 0.9,
            min_rr_coverage: 0.9,
            asleep_fraction: 0.5,
        }
    }
}

/// Cleaned, time-sorted streams of one subject.
#[derive(Clone, Copy, Debug)]
pub struct Streams<'a> {
    pub acc: &'a [RawSample],
    pub gyr: &'a [RawSample],
    pub beats: &'a [Beat],
    pub acc_rate_hz: f64,
    pub gyr_rate_hz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionSegment<'a> {
    pub window: MotionWindow<'a>,
    pub state: State,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HrvSegment {
    pub range: TimeRange,
    pub state: State,
    pub series: Result<RRSeries, InvalidReason>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Segments<'a> {
    /// First grid boundary; `None` when all streams are empty.
    pub anchor: Option<i64>,
    pub acc: Vec<MotionSegment<'a>>,
    pub gyr: Vec<MotionSegment<'a>>,
    pub hrv: Vec<HrvSegment>,
    /// Step buckets outside every exclusion range.
    pub steps: Vec<StepRecord>,
}

fn excluded(range: &TimeRange, exclusions: &[TimeRange]) -> bool {
    exclusions.iter().any(|e| e.intersects(range))
}

fn grid_anchor(streams: &Streams<'_>, zone: &LocalZone) -> Option<i64> {
    let first = [
        streams.acc.first().map(|s| s.t_ms),
        streams.gyr.first().map(|s| s.t_ms),
        streams.beats.first().map(|b| b.t_ms.floor() as i64),
    ]
    .into_iter()
    .flatten()
    .min()?;
    Some(zone.ceil_hour(first))
}

/// Groups time-sorted items into grid cells `[anchor + i*len, anchor + (i+1)*len)`.
/// Yields `(cell_start, lo, hi)` index ranges for non-empty cells.
fn grid_cells<T>(
    items: &[T],
    time: impl Fn(&T) -> f64,
    anchor: i64,
    len: i64,
) -> Vec<(i64, usize, usize)> {
    let start = items.partition_point(|x| time(x) < anchor as f64);
    let mut cells = Vec::new();
    let mut lo = start;
    while lo < items.len() {
        let idx = ((time(&items[lo]) - anchor as f64) / len as f64).floor() as i64;
        let cell_start = anchor + idx * len;
        let cell_end = (cell_start + len) as f64;
        let hi = lo + items[lo..].partition_point(|x| time(x) < cell_end);
        cells.push((cell_start, lo, hi));
        lo = hi;
    }
    cells
}

fn motion_segments<'a>(
    sensor: Sensor,
    samples: &'a [RawSample],
    rate_hz: f64,
    anchor: i64,
    schedule: &SleepSchedule,
    exclusions: &[TimeRange],
    params: &WindowParams,
) -> Vec<MotionSegment<'a>> {
    let len = params.motion_window_ms;
    let expected = expected_count(len, rate_hz);
    grid_cells(samples, |s| s.t_ms as f64, anchor, len)
        .into_iter()
        .filter_map(|(start, lo, hi)| {
            let range = TimeRange::new(start, start + len);
            if excluded(&range, exclusions) {
                return None;
            }
            let window = MotionWindow {
                sensor,
                samples: Cow::Borrowed(&samples[lo..hi]),
                window_start: start,
                window_len_ms: len,
                expected_count: expected,
            };
            let valid = window.is_valid(params.min_motion_fraction);
            Some(MotionSegment {
                window,
                state: schedule.state_of(&range, params.asleep_fraction),
                valid,
            })
        })
        .collect()
}

pub fn segment_windows<'a>(
    streams: &Streams<'a>,
    steps: &[StepRecord],
    schedule: &SleepSchedule,
    exclusions: &[TimeRange],
    zone: &LocalZone,
    params: &WindowParams,
) -> Segments<'a> {
    let steps: Vec<StepRecord> = steps
        .iter()
        .filter(|s| !excluded(&s.range(), exclusions))
        .copied()
        .collect();
    let Some(anchor) = grid_anchor(streams, zone) else {
        return Segments {
            steps,
            ..Segments::default()
        };
    };

    let acc = motion_segments(
        Sensor::Acc,
        streams.acc,
        streams.acc_rate_hz,
        anchor,
        schedule,
        exclusions,
        params,
    );
    let gyr = motion_segments(
        Sensor::Gyr,
        streams.gyr,
        streams.gyr_rate_hz,
        anchor,
        schedule,
        exclusions,
        params,
    );

    let len = params.hrv_window_ms;
    let hrv = grid_cells(streams.beats, |b| b.t_ms, anchor, len)
        .into_iter()
        .filter_map(|(start, lo, hi)| {
            let range = TimeRange::new(start, start + len);
            if excluded(&range, exclusions) {
                return None;
            }
            Some(HrvSegment {
                range,
                state: schedule.state_of(&range, params.asleep_fraction),
                series: RRSeries::from_beats(&streams.beats[lo..hi], range, params.min_rr_coverage),
            })
        })
        .collect();

    Segments {
        anchor: Some(anchor),
        acc,
        gyr,
        hrv,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::DateRange;
    use proptest::prelude::*;

    // 2020-03-01T00:00:00Z
    const T0: i64 = 1_583_020_800_000;

    fn motion(start: i64, end: i64, step: i64) -> Vec<RawSample> {
        (start..end)
            .step_by(step as usize)
            .map(|t| RawSample {
                t_ms: t,
                x: 1.0,
                y: 0.0,
                z: 0.0,
            })
            .collect()
    }

    fn beats(start: i64, end: i64) -> Vec<Beat> {
        let mut t = start as f64;
        let mut out = Vec::new();
        while t < end as f64 {
            out.push(Beat {
                t_ms: t,
                rr_ms: 800.0,
            });
            t += 800.0;
        }
        out
    }

    #[test]
    fn two_hours_without_sleep() {
        let acc = motion(T0, T0 + 2 * HOUR_MS, 50);
        let gyr = acc.clone();
        let b = beats(T0, T0 + 2 * HOUR_MS);
        let streams = Streams {
            acc: &acc,
            gyr: &gyr,
            beats: &b,
            acc_rate_hz: 20.0,
            gyr_rate_hz: 20.0,
        };
        let seg = segment_windows(
            &streams,
            &[],
            &SleepSchedule::default(),
            &[],
            &LocalZone::utc(),
            &WindowParams::default(),
        );
        assert_eq!(seg.anchor, Some(T0));
        assert_eq!(seg.acc.len(), 12);
        assert_eq!(seg.gyr.len(), 12);
        assert_eq!(seg.hrv.len(), 2);
        assert!(seg.acc.iter().all(|w| w.valid && w.state == State::Awake));
        assert!(seg.acc.iter().all(|w| w.window.samples.len() == 12_000));
        assert!(seg.hrv.iter().all(|w| w.state == State::Awake));
        // The first HRV window starts at its first beat, which carries a full
        // interval, so coverage is the whole hour.
        assert!(seg.hrv.iter().all(|w| w.series.is_ok()));
    }

    #[test]
    fn partial_first_hour_is_skipped() {
        let acc = motion(T0 + 25 * MINUTE_MS, T0 + 2 * HOUR_MS, 50);
        let streams = Streams {
            acc: &acc,
            gyr: &[],
            beats: &[],
            acc_rate_hz: 20.0,
            gyr_rate_hz: 20.0,
        };
        let seg = segment_windows(
            &streams,
            &[],
            &SleepSchedule::default(),
            &[],
            &LocalZone::parse("+02:00").unwrap(),
            &WindowParams::default(),
        );
        assert_eq!(seg.anchor, Some(T0 + HOUR_MS));
        assert_eq!(seg.acc.len(), 6);
    }

    #[test]
    fn sparse_window_is_invalid() {
        let mut acc = motion(T0, T0 + 10 * MINUTE_MS, 50);
        acc.truncate(10_799); // just under 90%
        let streams = Streams {
            acc: &acc,
            gyr: &[],
            beats: &[],
            acc_rate_hz: 20.0,
            gyr_rate_hz: 20.0,
        };
        let seg = segment_windows(
            &streams,
            &[],
            &SleepSchedule::default(),
            &[],
            &LocalZone::utc(),
            &WindowParams::default(),
        );
        assert_eq!(seg.acc.len(), 1);
        assert!(!seg.acc[0].valid);
    }

    #[test]
    fn overlap_fraction_tags_sleep() {
        let acc = motion(T0, T0 + 30 * MINUTE_MS, 50);
        // sleep covers 60% of window 0, 40% of window 2, none of window 1
        let sleep = SleepSchedule::new(vec![
            TimeRange::new(T0 + 4 * MINUTE_MS, T0 + 10 * MINUTE_MS),
            TimeRange::new(T0 + 26 * MINUTE_MS, T0 + 30 * MINUTE_MS),
        ])
        .unwrap();
        let streams = Streams {
            acc: &acc,
            gyr: &[],
            beats: &[],
            acc_rate_hz: 20.0,
            gyr_rate_hz: 20.0,
        };
        let seg = segment_windows(
            &streams,
            &[],
            &sleep,
            &[],
            &LocalZone::utc(),
            &WindowParams::default(),
        );
        let states: Vec<State> = seg.acc.iter().map(|w| w.state).collect();
        assert_eq!(states, vec![State::Asleep, State::Awake, State::Awake]);
    }

    #[test]
    fn lockdown_exclusion_drops_windows() {
        let zone = LocalZone::parse("Europe/Athens").unwrap();
        let lockdown: DateRange = "2020-03-15..2020-05-10".parse().unwrap();
        let excl = zone.date_range(&lockdown).unwrap();
        // 2020-03-14 22:00Z is already 2020-03-15 local in Athens (+02:00)
        let day_before = excl.start - 2 * HOUR_MS;
        let acc = motion(day_before, excl.start + 2 * HOUR_MS, 1000);
        let b = beats(day_before, excl.start + 2 * HOUR_MS);
        let steps = vec![
            StepRecord {
                bucket_start: day_before,
                steps: 5,
            },
            StepRecord {
                bucket_start: excl.start,
                steps: 7,
            },
        ];
        let streams = Streams {
            acc: &acc,
            gyr: &[],
            beats: &b,
            acc_rate_hz: 1.0,
            gyr_rate_hz: 1.0,
        };
        let seg = segment_windows(
            &streams,
            &steps,
            &SleepSchedule::default(),
            &[excl],
            &zone,
            &WindowParams::default(),
        );
        assert_eq!(seg.acc.len(), 12);
        assert!(seg.acc.iter().all(|w| w.window.range().end <= excl.start));
        assert_eq!(seg.hrv.len(), 2);
        assert_eq!(seg.steps, vec![steps[0]]);
    }

    proptest! {
        #[test]
        fn windows_partition_without_overlap(
            gaps in prop::collection::vec(1i64..400_000, 1..400),
            offset in 0i64..HOUR_MS,
        ) {
            let mut t = T0 + offset;
            let acc: Vec<RawSample> = gaps.iter().map(|g| { t += g; RawSample { t_ms: t, x: 0.0, y: 0.0, z: 1.0 } }).collect();
            let streams = Streams { acc: &acc, gyr: &[], beats: &[], acc_rate_hz: 20.0, gyr_rate_hz: 20.0 };
            let seg = segment_windows(&streams, &[], &SleepSchedule::default(), &[], &LocalZone::utc(), &WindowParams::default());
            let anchor = seg.anchor.unwrap();
            let kept = acc.iter().filter(|s| s.t_ms >= anchor).count();
            let total: usize = seg.acc.iter().map(|w| w.window.samples.len()).sum();
            prop_assert_eq!(total, kept);
            for w in &seg.acc {
                let r = w.window.range();
                prop_assert!(w.window.samples.iter().all(|s| r.contains(s.t_ms)));
                prop_assert_eq!((r.start - anchor) % (10 * MINUTE_MS), 0);
            }
            for pair in seg.acc.windows(2) {
                prop_assert!(pair[0].window.range().end <= pair[1].window.range().start);
            }
        }

        #[test]
        fn steps_are_conserved(
            counts in prop::collection::vec(0u32..500, 1..200),
            excl_start in 0usize..200,
            excl_len in 0usize..50,
        ) {
            let steps: Vec<StepRecord> = counts.iter().enumerate()
                .map(|(i, &c)| StepRecord { bucket_start: T0 + i as i64 * 10 * MINUTE_MS, steps: c })
                .collect();
            let excl = TimeRange::new(T0 + excl_start as i64 * 10 * MINUTE_MS, T0 + (excl_start + excl_len) as i64 * 10 * MINUTE_MS);
            let streams = Streams { acc: &[], gyr: &[], beats: &[], acc_rate_hz: 20.0, gyr_rate_hz: 20.0 };
            let seg = segment_windows(&streams, &steps, &SleepSchedule::default(), &[excl], &LocalZone::utc(), &WindowParams::default());
            let expected: u64 = steps.iter().filter(|s| !excl.intersects(&s.range())).map(|s| u64::from(s.steps)).sum();
            let got: u64 = seg.steps.iter().map(|s| u64::from(s.steps)).sum();
            prop_assert_eq!(got, expected);
        }
    }
}
