//! Per-subject aggregation of window features and daily activity.

use std::collections::BTreeMap;

use jiff::civil::Date;
use serde::{Deserialize, Serialize};

use crate::model::{
    DailyStats, FeatureName, FeatureRecord, Group, State, StepRecord, SubjectSummary, SummaryStat,
};
use crate::time::{LocalZone, TimeRange};

/// Denominator used for standard deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdConvention {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

pub fn summarize_values(values: &[f64], convention: StdConvention) -> SummaryStat {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let denom = match convention {
            StdConvention::Population => n,
            StdConvention::Sample => n - 1,
        };
        (ss / denom as f64).sqrt()
    });
    SummaryStat { n, mean, std }
}

/// Mean and standard deviation of every (feature, state) over a subject's windows.
pub fn summarize_subject(
    subject_id: &str,
    group: Group,
    records: &[FeatureRecord],
    daily: DailyStats,
    convention: StdConvention,
) -> SubjectSummary {
    let mut by_key: BTreeMap<(FeatureName, State), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.value.is_finite()) {
        by_key
            .entry((r.feature, r.state))
            .or_default()
            .push(r.value);
    }
    let mut flags = Vec::new();
    let mut features = BTreeMap::new();
    for feature in FeatureName::ALL {
        for state in State::ALL {
            match by_key.get(&(feature, state)) {
                None => flags.push(format!("{feature}/{state}: no windows")),
                Some(values) => {
                    let stat = summarize_values(values, convention);
                    if stat.std.is_none() {
                        flags.push(format!("{feature}/{state}: std undefined with 1 window"));
                    }
                    features.insert((feature, state), stat);
                }
            }
        }
    }
    SubjectSummary {
        subject_id: subject_id.to_string(),
        group,
        features,
        daily,
        flags,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DailyParams {
    /// Recorded hours a local day needs to qualify.
    pub min_hours_per_day: usize,
    /// Qualifying days a subject needs for the daily comparisons.
    pub min_days: usize,
}

impl Default for DailyParams {
    fn default() -> Self {
        Self {
            min_hours_per_day: 20,
            min_days: 30,
        }
    }
}

/// A motion window holding valid data, with its state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecordedWindow {
    pub range: TimeRange,
    pub state: State,
}

#[derive(Default)]
struct Day {
    hours: std::collections::BTreeSet<i64>,
    asleep_ms: i64,
    awake_ms: i64,
    steps: u64,
}

/// Sleep/wake ratio and step totals over the subject's qualifying days.
///
/// A day's recorded hours are the distinct local hour slots holding a
/// recorded window.
pub fn daily_stats(
    windows: &[RecordedWindow],
    steps: &[StepRecord],
    zone: &LocalZone,
    params: &DailyParams,
    convention: StdConvention,
) -> DailyStats {
    let mut days: BTreeMap<Date, Day> = BTreeMap::new();
    for w in windows {
        let day = days.entry(zone.local_date(w.range.start)).or_default();
        day.hours.insert(zone.floor_hour(w.range.start));
        match w.state {
            State::Asleep => day.asleep_ms += w.range.len_ms(),
            State::Awake => day.awake_ms += w.range.len_ms(),
        }
    }
    for s in steps {
        if let Some(day) = days.get_mut(&zone.local_date(s.bucket_start)) {
            day.steps += u64::from(s.steps);
        }
    }
    let qualifying: Vec<&Day> = days
        .values()
        .filter(|d| d.hours.len() >= params.min_hours_per_day)
        .collect();
    let ratios: Vec<f64> = qualifying
        .iter()
        .filter(|d| d.awake_ms > 0)
        .map(|d| d.asleep_ms as f64 / d.awake_ms as f64)
        .collect();
    let totals: Vec<f64> = qualifying.iter().map(|d| d.steps as f64).collect();
    DailyStats {
        qualifying_days: qualifying.len(),
        eligible: qualifying.len() >= params.min_days,
        sleep_wake_ratio: (!ratios.is_empty()).then(|| summarize_values(&ratios, convention)),
        steps_per_day: (!totals.is_empty()).then(|| summarize_values(&totals, convention)),
    }
}
