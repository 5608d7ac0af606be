//! Domain types shared across the pipeline.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::clean::{clean_rr, CleaningParams};
use crate::time::{TimeRange, MINUTE_MS};

/// One tri-axial motion sample (m/s² for acc, deg/s for gyr).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub t_ms: i64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl RawSample {
    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

/// One 5 Hz RR report; the device repeats the last value until a new beat arrives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRRSample {
    pub t_ms: i64,
    pub rr_ms: f64,
}

/// A cleaned beat: absolute beat time (ms, fractional after interpolation)
/// and the interval ending at that beat.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beat {
    pub t_ms: f64,
    pub rr_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensor {
    Acc,
    Gyr,
}

impl Sensor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sensor::Acc => "acc",
            Sensor::Gyr => "gyr",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum State {
    Awake,
    Asleep,
}

impl State {
    pub const ALL: [State; 2] = [State::Awake, State::Asleep];

    pub fn as_str(&self) -> &'static str {
        match self {
            State::Awake => "awake",
            State::Asleep => "asleep",
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awake" => Ok(State::Awake),
            "asleep" => Ok(State::Asleep),
            _ => Err(Error::invalid(format!("unknown state `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Control,
    Patient,
}

impl Group {
    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Control => "control",
            Group::Patient => "patient",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The closed catalog of per-window features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureName {
    #[serde(rename = "acc_STE")]
    AccSte,
    #[serde(rename = "gyr_STE")]
    GyrSte,
    #[serde(rename = "sampen")]
    SampEn,
    #[serde(rename = "higuchi")]
    Higuchi,
    #[serde(rename = "mfd_fd1")]
    MfdFd1,
    #[serde(rename = "mfd_min")]
    MfdMin,
    #[serde(rename = "mfd_max")]
    MfdMax,
    #[serde(rename = "mfd_mean")]
    MfdMean,
    #[serde(rename = "mfd_std")]
    MfdStd,
    #[serde(rename = "sd1")]
    Sd1,
    #[serde(rename = "sd2")]
    Sd2,
    #[serde(rename = "lf_power")]
    LfPower,
    #[serde(rename = "hf_power")]
    HfPower,
    #[serde(rename = "lf_hf_ratio")]
    LfHfRatio,
}

impl FeatureName {
    pub const ALL: [FeatureName; 14] = [
        FeatureName::AccSte,
        FeatureName::GyrSte,
        FeatureName::SampEn,
        FeatureName::Higuchi,
        FeatureName::MfdFd1,
        FeatureName::MfdMin,
        FeatureName::MfdMax,
        FeatureName::MfdMean,
        FeatureName::MfdStd,
        FeatureName::Sd1,
        FeatureName::Sd2,
        FeatureName::LfPower,
        FeatureName::HfPower,
        FeatureName::LfHfRatio,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureName::AccSte => "acc_STE",
            FeatureName::GyrSte => "gyr_STE",
            FeatureName::SampEn => "sampen",
            FeatureName::Higuchi => "higuchi",
            FeatureName::MfdFd1 => "mfd_fd1",
            FeatureName::MfdMin => "mfd_min",
            FeatureName::MfdMax => "mfd_max",
            FeatureName::MfdMean => "mfd_mean",
            FeatureName::MfdStd => "mfd_std",
            FeatureName::Sd1 => "sd1",
            FeatureName::Sd2 => "sd2",
            FeatureName::LfPower => "lf_power",
            FeatureName::HfPower => "hf_power",
            FeatureName::LfHfRatio => "lf_hf_ratio",
        }
    }

    /// True for features computed from the 1-hour HRV windows.
    pub fn is_hrv(&self) -> bool {
        !matches!(self, FeatureName::AccSte | FeatureName::GyrSte)
    }
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureName::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown feature `{s}`")))
    }
}

/// Cleaned RR intervals of one HRV window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RRSeries {
    /// Seconds since `window.start`.
    pub beat_times: Vec<f64>,
    /// Interval ending at each beat, ms.
    pub intervals: Vec<f64>,
    pub window: TimeRange,
    pub coverage_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    Empty,
    InsufficientCoverage { coverage_s: f64, required_s: f64 },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::Empty => f.write_str("empty"),
            InvalidReason::InsufficientCoverage {
                coverage_s,
                required_s,
            } => write!(
                f,
                "insufficient_coverage ({coverage_s:.1} s < {required_s:.1} s)"
            ),
        }
    }
}

impl RRSeries {
    /// Builds the series for `window` from cleaned beats (sorted by time).
    ///
    /// The window passes when its intervals sum to at least `min_fraction` of
    /// the window length; the threshold is inclusive.
    pub fn from_beats(
        beats: &[Beat],
        window: TimeRange,
        min_fraction: f64,
    ) -> std::result::Result<RRSeries, InvalidReason> {
        let lo = beats.partition_point(|b| b.t_ms < window.start as f64);
        let hi = beats.partition_point(|b| b.t_ms < window.end as f64);
        let inside = &beats[lo..hi];
        if inside.is_empty() {
            return Err(InvalidReason::Empty);
        }
        let start = window.start as f64;
        let beat_times = inside.iter().map(|b| (b.t_ms - start) / 1000.0).collect();
        let intervals: Vec<f64> = inside.iter().map(|b| b.rr_ms).collect();
        let coverage_seconds = intervals.iter().sum::<f64>() / 1000.0;
        let required_s = min_fraction * window.len_ms() as f64 / 1000.0;
        if coverage_seconds < required_s {
            return Err(InvalidReason::InsufficientCoverage {
                coverage_s: coverage_seconds,
                required_s,
            });
        }
        Ok(RRSeries {
            beat_times,
            intervals,
            window,
            coverage_seconds,
        })
    }

    /// Absolute beats of this series.
    pub fn beats(&self) -> Vec<Beat> {
        let start = self.window.start as f64;
        self.beat_times
            .iter()
            .zip(&self.intervals)
            .map(|(&t, &rr)| Beat {
                t_ms: start + t * 1000.0,
                rr_ms: rr,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Cleans `raw` and validates the coverage of `window`.
pub fn validate_rr_window(
    raw: &[RawRRSample],
    window: TimeRange,
    cleaning: &CleaningParams,
    min_fraction: f64,
) -> std::result::Result<RRSeries, InvalidReason> {
    if raw.is_empty() {
        return Err(InvalidReason::Empty);
    }
    let beats = clean_rr(raw, cleaning);
    RRSeries::from_beats(&beats, window, min_fraction)
}

/// One motion window (acc or gyr).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionWindow<'a> {
    pub sensor: Sensor,
    pub samples: Cow<'a, [RawSample]>,
    pub window_start: i64,
    pub window_len_ms: i64,
    /// Nominal sample count (12000 for 10 min at 20 Hz).
    pub expected_count: usize,
}

impl MotionWindow<'_> {
    pub fn range(&self) -> TimeRange {
        TimeRange::new(self.window_start, self.window_start + self.window_len_ms)
    }

    /// Whether the window holds at least `min_fraction` of the nominal samples.
    /// Empty windows are never valid.
    pub fn is_valid(&self, min_fraction: f64) -> bool {
        !self.samples.is_empty()
            && self.samples.len() as f64 >= min_fraction * self.expected_count as f64
    }
}

pub fn expected_count(window_len_ms: i64, rate_hz: f64) -> usize {
    (window_len_ms as f64 / 1000.0 * rate_hz).round() as usize
}

/// Non-overlapping sleep intervals, sorted by start.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SleepSchedule {
    intervals: Vec<TimeRange>,
}

impl SleepSchedule {
    /// Validates ordering and disjointness.
    pub fn new(mut intervals: Vec<TimeRange>) -> Result<Self> {
        intervals.sort();
        for r in &intervals {
            if r.end <= r.start {
                return Err(Error::invalid(format!(
                    "sleep interval {}..{} has end <= start",
                    r.start, r.end
                )));
            }
        }
        for pair in intervals.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::invalid(format!(
                    "sleep intervals overlap at {}",
                    pair[1].start
                )));
            }
        }
        Ok(Self { intervals })
    }

    /// Like [`SleepSchedule::new`] but merges overlapping or touching intervals.
    pub fn merged(mut intervals: Vec<TimeRange>) -> Result<Self> {
        intervals.retain(|r| r.end > r.start);
        intervals.sort();
        let mut out: Vec<TimeRange> = Vec::with_capacity(intervals.len());
        for r in intervals {
            match out.last_mut() {
                Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
                _ => out.push(r),
            }
        }
        Self::new(out)
    }

    pub fn intervals(&self) -> &[TimeRange] {
        &self.intervals
    }

    /// Milliseconds of `range` covered by sleep.
    pub fn asleep_ms(&self, range: &TimeRange) -> i64 {
        let first = self.intervals.partition_point(|r| r.end <= range.start);
        self.intervals[first..]
            .iter()
            .take_while(|r| r.start < range.end)
            .map(|r| r.overlap_ms(range))
            .sum()
    }

    /// Majority-overlap rule: asleep when at least `fraction` of the range is sleep.
    pub fn state_of(&self, range: &TimeRange, fraction: f64) -> State {
        let asleep = self.asleep_ms(range) as f64;
        if range.len_ms() > 0 && asleep >= fraction * range.len_ms() as f64 {
            State::Asleep
        } else {
            State::Awake
        }
    }
}

/// Steps counted over one 10-minute bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub bucket_start: i64,
    pub steps: u32,
}

pub const STEP_BUCKET_MS: i64 = 10 * MINUTE_MS;

impl StepRecord {
    pub fn range(&self) -> TimeRange {
        TimeRange::new(self.bucket_start, self.bucket_start + STEP_BUCKET_MS)
    }
}

/// One window's value of one catalog feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub subject_id: String,
    pub feature: FeatureName,
    pub window_start: i64,
    pub state: State,
    pub value: f64,
}

/// Mean and spread of one quantity over a subject's windows or days.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStat {
    pub n: usize,
    pub mean: f64,
    /// `None` when fewer than two values were available.
    pub std: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DailyStats {
    pub qualifying_days: usize,
    pub eligible: bool,
    pub sleep_wake_ratio: Option<SummaryStat>,
    pub steps_per_day: Option<SummaryStat>,
}

/// Per-subject summary feeding the group comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectSummary {
    pub subject_id: String,
    pub group: Group,
    #[serde(with = "feature_map")]
    pub features: BTreeMap<(FeatureName, State), SummaryStat>,
    pub daily: DailyStats,
    /// Human-readable notes on missing states or undefined spreads.
    pub flags: Vec<String>,
}

impl SubjectSummary {
    pub fn get(&self, feature: FeatureName, state: State) -> Option<&SummaryStat> {
        self.features.get(&(feature, state))
    }
}

mod feature_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{FeatureName, State, SummaryStat};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        feature: FeatureName,
        state: State,
        #[serde(flatten)]
        stat: SummaryStat,
    }

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(FeatureName, State), SummaryStat>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map
            .iter()
            .map(|(&(feature, state), &stat)| Entry {
                feature,
                state,
                stat,
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(FeatureName, State), SummaryStat>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries
            .into_iter()
            .map(|e| ((e.feature, e.state), e.stat))
            .collect())
    }
}
