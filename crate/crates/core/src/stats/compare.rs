//! Control-versus-patient comparisons over subject summaries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bh::benjamini_hochberg;
use super::boxplot::{boxplot_stats, BoxplotStats};
use super::mwu::{mann_whitney_u, PMethod};
use crate::error::{Error, Result};
use crate::model::{FeatureName, Group, State, SubjectSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Std,
}

impl Statistic {
    pub const ALL: [Statistic; 2] = [Statistic::Mean, Statistic::Std];

    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Std => "std",
        }
    }
}

/// A per-subject quantity compared between groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Measure {
    Feature(FeatureName),
    SleepWakeRatio,
    StepsPerDay,
}

impl Measure {
    pub fn is_daily(&self) -> bool {
        !matches!(self, Measure::Feature(_))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Feature(name) => f.write_str(name.as_str()),
            Measure::SleepWakeRatio => f.write_str("sleep_wake_ratio"),
            Measure::StepsPerDay => f.write_str("steps_per_day"),
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sleep_wake_ratio" => Ok(Measure::SleepWakeRatio),
            "steps_per_day" => Ok(Measure::StepsPerDay),
            other => other.parse().map(Measure::Feature),
        }
    }
}

impl From<Measure> for String {
    fn from(m: Measure) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Measure {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Block a test belongs to: one of the two states, or the daily statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Awake,
    Asleep,
    Daily,
}

impl Block {
    pub fn as_str(&self) -> &'static str {
        match self {
            Block::Awake => "awake",
            Block::Asleep => "asleep",
            Block::Daily => "daily",
        }
    }
}

impl From<State> for Block {
    fn from(s: State) -> Self {
        match s {
            State::Awake => Block::Awake,
            State::Asleep => Block::Asleep,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMode {
    /// One BH family per block (awake, asleep, daily).
    #[default]
    PerState,
    /// All tests in one family.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonConfig {
    pub alpha: f64,
    pub families: FamilyMode,
    /// Measures left out of testing and therefore of every family.
    pub omit: Vec<Measure>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            families: FamilyMode::PerState,
            omit: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDescription {
    pub n: usize,
    pub median: f64,
    pub iqr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub measure: Measure,
    pub statistic: Statistic,
    pub state: Block,
    pub family: String,
    pub control: GroupDescription,
    pub patient: GroupDescription,
    /// U of the control sample.
    pub u_statistic: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub significant: bool,
    pub method: PMethod,
}

impl TestResult {
    /// Row label such as `acc_STE mean`.
    pub fn label(&self) -> String {
        format!("{} {}", self.measure, self.statistic.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedTest {
    pub measure: Measure,
    pub statistic: Statistic,
    pub state: Block,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxplotRecord {
    pub feature: String,
    pub state: Block,
    pub group: Group,
    #[serde(flatten)]
    pub stats: BoxplotStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub alpha: f64,
    pub results: Vec<TestResult>,
    pub skipped: Vec<SkippedTest>,
    pub boxplots: Vec<BoxplotRecord>,
}

impl Comparison {
    pub fn find(
        &self,
        measure: Measure,
        statistic: Statistic,
        state: Block,
    ) -> Option<&TestResult> {
        self.results
            .iter()
            .find(|r| r.measure == measure && r.statistic == statistic && r.state == state)
    }

    pub fn significant_fraction(&self) -> f64 {
        if self.results.is_empty() {
            return 0.0;
        }
        self.results.iter().filter(|r| r.significant).count() as f64 / self.results.len() as f64
    }
}

/// Every test in report order: awake and asleep features, then daily measures.
pub fn planned_tests() -> Vec<(Measure, Statistic, Block)> {
    let mut plan = Vec::new();
    for state in State::ALL {
        for feature in FeatureName::ALL {
            for stat in Statistic::ALL {
                plan.push((Measure::Feature(feature), stat, Block::from(state)));
            }
        }
    }
    for measure in [Measure::SleepWakeRatio, Measure::StepsPerDay] {
        for stat in Statistic::ALL {
            plan.push((measure, stat, Block::Daily));
        }
    }
    plan
}

fn subject_value(
    s: &SubjectSummary,
    measure: Measure,
    stat: Statistic,
    block: Block,
) -> Option<f64> {
    let summary = match (measure, block) {
        (Measure::Feature(f), Block::Awake) => s.get(f, State::Awake).copied(),
        (Measure::Feature(f), Block::Asleep) => s.get(f, State::Asleep).copied(),
        (Measure::SleepWakeRatio, Block::Daily) if s.daily.eligible => s.daily.sleep_wake_ratio,
        (Measure::StepsPerDay, Block::Daily) if s.daily.eligible => s.daily.steps_per_day,
        _ => None,
    }?;
    let v = match stat {
        Statistic::Mean => Some(summary.mean),
        Statistic::Std => summary.std,
    }?;
    v.is_finite().then_some(v)
}

fn describe(values: &[f64]) -> Result<(GroupDescription, BoxplotStats)> {
    let b = boxplot_stats(values)?;
    Ok((
        GroupDescription {
            n: values.len(),
            median: b.median,
            iqr: b.iqr(),
        },
        b,
    ))
}

/// Runs one Mann-Whitney test per planned (measure, statistic, block) and
/// adjusts within the configured families.
pub fn run_comparisons(
    summaries: &[SubjectSummary],
    config: &ComparisonConfig,
) -> Result<Comparison> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha {} outside (0, 1)",
            config.alpha
        )));
    }
    for group in [Group::Control, Group::Patient] {
        let n = summaries.iter().filter(|s| s.group == group).count();
        if n < 2 {
            return Err(Error::Config(format!(
                "{group} group has {n} subjects; at least 2 are required"
            )));
        }
    }

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    let mut boxplots = Vec::new();
    for (measure, statistic, state) in planned_tests() {
        if config.omit.contains(&measure) {
            continue;
        }
        let values = |group: Group| -> Vec<f64> {
            summaries
                .iter()
                .filter(|s| s.group == group)
                .filter_map(|s| subject_value(s, measure, statistic, state))
                .collect()
        };
        let control = values(Group::Control);
        let patient = values(Group::Patient);
        if control.len() < 2 || patient.len() < 2 {
            skipped.push(SkippedTest {
                measure,
                statistic,
                state,
                reason: format!(
                    "too few values (control {}, patient {})",
                    control.len(),
                    patient.len()
                ),
            });
            continue;
        }
        let test = mann_whitney_u(&control, &patient)?;
        let (control_desc, control_box) = describe(&control)?;
        let (patient_desc, patient_box) = describe(&patient)?;
        let label = format!("{measure} {}", statistic.as_str());
        for (group, stats) in [(Group::Control, control_box), (Group::Patient, patient_box)] {
            boxplots.push(BoxplotRecord {
                feature: label.clone(),
                state,
                group,
                stats,
            });
        }
        results.push(TestResult {
            measure,
            statistic,
            state,
            family: match config.families {
                FamilyMode::PerState => state.as_str().to_string(),
                FamilyMode::Pooled => "all".to_string(),
            },
            control: control_desc,
            patient: patient_desc,
            u_statistic: test.u_a,
            p_raw: test.p,
            p_adjusted: f64::NAN,
            significant: false,
            method: test.method,
        });
    }

    let mut families: Vec<String> = results.iter().map(|r| r.family.clone()).collect();
    families.dedup();
    for family in families {
        let idx: Vec<usize> = (0..results.len())
            .filter(|&i| results[i].family == family)
            .collect();
        let raw: Vec<f64> = idx.iter().map(|&i| results[i].p_raw).collect();
        let adjusted = benjamini_hochberg(&raw)?;
        for (&i, p) in idx.iter().zip(adjusted) {
            results[i].p_adjusted = p;
            results[i].significant = p < config.alpha;
        }
    }

    Ok(Comparison {
        alpha: config.alpha,
        results,
        skipped,
        boxplots,
    })
}
