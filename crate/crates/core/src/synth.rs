//! Synthetic two-group cohorts written in the subject directory layout.
//!
//! Each subject gets its own ChaCha8 stream seeded from SHA-256 of the cohort
//! seed and the subject id, so output does not depend on generation order.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use jiff::civil::Date;
use jiff::ToSpan;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::ingest::{write_subject_dir, Manifest, SubjectData};
use crate::model::{
    Group, RawRRSample, RawSample, SleepSchedule, State, StepRecord, STEP_BUCKET_MS,
};
use crate::time::{DateRange, LocalZone, TimeRange, HOUR_MS};

pub const SPEC_VERSION: u32 = 1;
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const CONFIG_FILE: &str = "config.json";

/// RR reports arrive every 200 ms.
const TICK_MS: i64 = 200;
const LF_HZ: f64 = 0.1;
const HF_HZ: f64 = 0.25;
const OUT_OF_RANGE_LOW: f64 = 250.0;
const OUT_OF_RANGE_HIGH: f64 = 2300.0;

fn one() -> u32 {
    1
}

fn utc() -> String {
    "UTC".to_string()
}

fn twenty() -> f64 {
    20.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSpec {
    #[serde(default = "one")]
    pub version: u32,
    /// First local date, `YYYY-MM-DD`.
    pub start_date: String,
    #[serde(default = "one")]
    pub days: u32,
    /// Recording length in hours; overrides `days` when set.
    #[serde(default)]
    pub hours: Option<u32>,
    /// Local hour at which recording starts.
    #[serde(default)]
    pub start_hour: u32,
    #[serde(default = "utc")]
    pub timezone: String,
    #[serde(default = "twenty")]
    pub motion_rate_hz: f64,
    pub groups: Vec<GroupSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub group: Group,
    pub subjects: usize,
    /// Subject ids are `<prefix><NNN>`; defaults to `C` or `P`.
    #[serde(default)]
    pub id_prefix: Option<String>,
    #[serde(default)]
    pub model: SubjectModel,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubjectModel {
    pub sleep: SleepModel,
    pub rr: RrModel,
    pub motion: MotionModel,
    pub steps: StepModel,
    pub artifacts: ArtifactModel,
    pub between_subject: SubjectVariation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SleepModel {
    /// Local bedtime in hours after midnight (may exceed 24).
    pub bedtime_hour: f64,
    pub bedtime_jitter_h: f64,
    pub duration_h: f64,
    pub duration_jitter_h: f64,
}

impl Default for SleepModel {
    fn default() -> Self {
        Self {
            bedtime_hour: 23.0,
            bedtime_jitter_h: 0.5,
            duration_h: 8.0,
            duration_jitter_h: 0.5,
        }
    }
}

/// Heart period model: state baseline, LF and HF sinusoids and a noise term
/// mixing AR(1) and white components. The white share is redrawn every hour,
/// which spreads sample entropy across windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RrModel {
    pub awake_rr_ms: f64,
    pub asleep_rr_ms: f64,
    pub lf_amp_ms: f64,
    pub hf_amp_ms: f64,
    pub noise_sd_ms: f64,
    pub ar_coef: f64,
    pub white_mix: f64,
    pub white_mix_hour_sd: f64,
}

impl Default for RrModel {
    fn default() -> Self {
        Self {
            awake_rr_ms: 800.0,
            asleep_rr_ms: 900.0,
            lf_amp_ms: 20.0,
            hf_amp_ms: 15.0,
            noise_sd_ms: 30.0,
            ar_coef: 0.9,
            white_mix: 0.5,
            white_mix_hour_sd: 0.05,
        }
    }
}

/// Gamma-distributed energy target of each 10-minute bout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Energy {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorEnergy {
    pub awake: Energy,
    pub asleep: Energy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionModel {
    pub acc: SensorEnergy,
    pub gyr: SensorEnergy,
    /// Relative per-sample jitter of the vector norm.
    pub norm_jitter: f64,
}

impl Default for MotionModel {
    fn default() -> Self {
        Self {
            acc: SensorEnergy {
                awake: Energy { mean: 1.3, sd: 0.4 },
                asleep: Energy {
                    mean: 1.0,
                    sd: 0.05,
                },
            },
            gyr: SensorEnergy {
                awake: Energy {
                    mean: 3000.0,
                    sd: 1500.0,
                },
                asleep: Energy {
                    mean: 200.0,
                    sd: 100.0,
                },
            },
            norm_jitter: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepModel {
    /// Poisson mean per awake 10-minute bucket.
    pub awake_steps_per_bucket: f64,
}

impl Default for StepModel {
    fn default() -> Self {
        Self {
            awake_steps_per_bucket: 80.0,
        }
    }
}

/// Injected faults, as exact fractions of their populations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArtifactModel {
    /// Share of beats reported with an out-of-range value.
    pub out_of_range_rate: f64,
    /// Share of RR rows written twice.
    pub duplicate_row_rate: f64,
    /// Share of recording hours with the watch off.
    pub dropout_rate: f64,
}

/// Between-subject spread of the group model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubjectVariation {
    /// Log-scale sd of a subject's energy multiplier.
    pub energy_sd: f64,
    pub rr_sd_ms: f64,
    pub mix_sd: f64,
}

impl Default for SubjectVariation {
    fn default() -> Self {
        Self {
            energy_sd: 0.1,
            rr_sd_ms: 40.0,
            mix_sd: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowTruth {
    pub start: i64,
    pub state: State,
    pub acc_energy: f64,
    pub gyr_energy: f64,
    /// Inside a dropout hour; no samples were written.
    pub dropped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HourTruth {
    pub start: i64,
    /// Majority-overlap state of the hour.
    pub state: State,
    /// White-noise share of the RR noise.
    pub white_mix: f64,
    pub dropped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectTruth {
    pub subject_id: String,
    pub group: Group,
    pub recording: TimeRange,
    pub energy_scale: f64,
    pub rr_offset_ms: f64,
    pub mix_offset: f64,
    pub hours: Vec<HourTruth>,
    pub beats: usize,
    pub out_of_range_beats: usize,
    pub rr_rows: usize,
    pub duplicate_rows: usize,
    pub dropout_hours: Vec<i64>,
    pub asleep_ms: i64,
    pub steps_total: u64,
    pub windows: Vec<WindowTruth>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohortTruth {
    pub seed: u64,
    pub spec: CohortSpec,
    pub subjects: Vec<SubjectTruth>,
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn check_energy(name: &str, e: &Energy) -> Result<()> {
    check(
        e.mean > 0.0 && e.sd >= 0.0 && e.mean.is_finite() && e.sd.is_finite(),
        || format!("{name}: energy needs mean > 0 and sd >= 0, got {e:?}"),
    )
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    check((0.0..1.0).contains(&v), || {
        format!("{name} = {v} outside [0, 1)")
    })
}

impl SubjectModel {
    pub fn validate(&self) -> Result<()> {
        let s = &self.sleep;
        check(s.duration_h > 0.0 && s.duration_h < 24.0, || {
            format!("sleep duration {} h outside (0, 24)", s.duration_h)
        })?;
        check(
            s.bedtime_jitter_h >= 0.0 && s.duration_jitter_h >= 0.0,
            || "sleep jitter must be non-negative".into(),
        )?;
        let r = &self.rr;
        for (name, v) in [
            ("awake_rr_ms", r.awake_rr_ms),
            ("asleep_rr_ms", r.asleep_rr_ms),
        ] {
            check((400.0..=1600.0).contains(&v), || {
                format!("{name} = {v} outside [400, 1600]")
            })?;
        }
        check(
            r.lf_amp_ms >= 0.0 && r.hf_amp_ms >= 0.0 && r.noise_sd_ms >= 0.0,
            || "RR amplitudes must be non-negative".into(),
        )?;
        check((0.0..1.0).contains(&r.ar_coef), || {
            format!("ar_coef {} outside [0, 1)", r.ar_coef)
        })?;
        check(
            (0.0..=1.0).contains(&r.white_mix) && r.white_mix_hour_sd >= 0.0,
            || "white_mix must lie in [0, 1] with a non-negative spread".into(),
        )?;
        check_energy("acc awake", &self.motion.acc.awake)?;
        check_energy("acc asleep", &self.motion.acc.asleep)?;
        check_energy("gyr awake", &self.motion.gyr.awake)?;
        check_energy("gyr asleep", &self.motion.gyr.asleep)?;
        check(self.motion.norm_jitter >= 0.0, || {
            "norm_jitter must be non-negative".into()
        })?;
        check(self.steps.awake_steps_per_bucket >= 0.0, || {
            "step rate must be non-negative".into()
        })?;
        check_rate("out_of_range_rate", self.artifacts.out_of_range_rate)?;
        check_rate("duplicate_row_rate", self.artifacts.duplicate_row_rate)?;
        check_rate("dropout_rate", self.artifacts.dropout_rate)?;
        let v = &self.between_subject;
        check(
            v.energy_sd >= 0.0 && v.rr_sd_ms >= 0.0 && v.mix_sd >= 0.0,
            || "between-subject spreads must be non-negative".into(),
        )
    }
}

impl CohortSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: CohortSpec = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.version == SPEC_VERSION, || {
            format!("unsupported cohort spec version {}", self.version)
        })?;
        self.start()?;
        LocalZone::parse(&self.timezone)?;
        check(self.total_hours() > 0, || {
            "recording length must be positive".into()
        })?;
        check(self.start_hour < 24, || {
            format!("start_hour {} outside 0..24", self.start_hour)
        })?;
        check(
            self.motion_rate_hz > 0.0 && self.motion_rate_hz <= 1000.0,
            || format!("motion_rate_hz {} outside (0, 1000]", self.motion_rate_hz),
        )?;
        check(!self.groups.is_empty(), || "no groups".into())?;
        let mut ids = std::collections::BTreeSet::new();
        for g in &self.groups {
            check(g.subjects > 0, || {
                format!("{} group has no subjects", g.group)
            })?;
            g.model.validate()?;
            for i in 0..g.subjects {
                let id = g.subject_id(i);
                check(ids.insert(id.clone()), || {
                    format!("duplicate subject id {id}")
                })?;
            }
        }
        Ok(())
    }

    fn start(&self) -> Result<Date> {
        self.start_date
            .parse::<Date>()
            .map_err(|e| Error::Config(format!("bad start_date `{}`: {e}", self.start_date)))
    }

    pub fn total_hours(&self) -> u32 {
        self.hours.unwrap_or(self.days * 24)
    }

    /// Every subject as (group spec, index within group).
    pub fn roster(&self) -> Vec<(&GroupSpec, usize)> {
        self.groups
            .iter()
            .flat_map(|g| (0..g.subjects).map(move |i| (g, i)))
            .collect()
    }
}

impl GroupSpec {
    pub fn subject_id(&self, index: usize) -> String {
        let prefix = self.id_prefix.clone().unwrap_or_else(|| match self.group {
            Group::Control => "C".into(),
            Group::Patient => "P".into(),
        });
        format!("{prefix}{:03}", index + 1)
    }
}

pub fn subject_rng(seed: u64, subject_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(subject_id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn gamma_draw(rng: &mut ChaCha8Rng, e: Energy, scale: f64) -> f64 {
    let (mean, sd) = (e.mean * scale, e.sd * scale);
    if sd == 0.0 {
        return mean;
    }
    let shape = mean * mean / (sd * sd);
    Gamma::new(shape, sd * sd / mean)
        .expect("validated gamma parameters")
        .sample(rng)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn motion_samples(
    rng: &mut ChaCha8Rng,
    range: TimeRange,
    rate_hz: f64,
    energy: f64,
    jitter: f64,
    out: &mut Vec<RawSample>,
) {
    let period = 1000.0 / rate_hz;
    let count = (range.len_ms() as f64 / period).round() as usize;
    let norm = energy.sqrt();
    for i in 0..count {
        let t_ms = range.start + (i as f64 * period).round() as i64;
        let (mut x, mut y, mut z) = (normal(rng), normal(rng), normal(rng));
        let len = (x * x + y * y + z * z).sqrt().max(1e-12);
        let mut scale = norm / len;
        if jitter > 0.0 {
            scale *= 1.0 + jitter * normal(rng);
        }
        x *= scale;
        y *= scale;
        z *= scale;
        out.push(RawSample { t_ms, x, y, z });
    }
}

/// Generates one subject in memory.
pub fn generate_subject(
    spec: &CohortSpec,
    group: &GroupSpec,
    index: usize,
    seed: u64,
) -> Result<(SubjectData, SubjectTruth)> {
    let id = group.subject_id(index);
    let model = &group.model;
    let mut rng = subject_rng(seed, &id);
    let zone = LocalZone::parse(&spec.timezone)?;
    let start_date = spec.start()?;
    let start = zone.day_start(start_date)? + i64::from(spec.start_hour) * HOUR_MS;
    let hours = i64::from(spec.total_hours());
    let recording = TimeRange::new(start, start + hours * HOUR_MS);

    // Subject-level effects.
    let var = &model.between_subject;
    let energy_scale = (var.energy_sd * normal(&mut rng)).exp();
    let rr_offset_ms = var.rr_sd_ms * normal(&mut rng);
    let mix_offset = var.mix_sd * normal(&mut rng);

    // Sleep: one night per local date touching the recording, plus the one before.
    let sm = &model.sleep;
    let n_dates = (i64::from(spec.start_hour) + hours) / 24 + 2;
    let mut nights = Vec::new();
    for d in -1..n_dates {
        let date = start_date
            .checked_add(d.days())
            .map_err(|e| Error::Config(format!("date overflow: {e}")))?;
        let bed_h = sm.bedtime_hour + sm.bedtime_jitter_h * normal(&mut rng);
        let dur_h = (sm.duration_h + sm.duration_jitter_h * normal(&mut rng)).clamp(0.5, 23.0);
        let bed = zone.day_start(date)? + (bed_h * HOUR_MS as f64).round() as i64;
        let wake = bed + (dur_h * HOUR_MS as f64).round() as i64;
        let r = TimeRange::new(bed.max(recording.start), wake.min(recording.end));
        if r.end > r.start {
            nights.push(r);
        }
    }
    let sleep = SleepSchedule::merged(nights)?;

    // Dropout hours.
    let n_drop = (model.artifacts.dropout_rate * hours as f64).round() as usize;
    let mut dropped_idx: Vec<usize> = index::sample(&mut rng, hours as usize, n_drop).into_vec();
    dropped_idx.sort_unstable();
    let dropout_hours: Vec<i64> = dropped_idx
        .iter()
        .map(|&h| start + h as i64 * HOUR_MS)
        .collect();
    let is_dropped = |t: i64| {
        let h = (t - start).div_euclid(HOUR_MS);
        dropped_idx.binary_search(&(h as usize)).is_ok()
    };

    // Motion bouts and steps on the 10-minute grid.
    let mut acc = Vec::new();
    let mut gyr = Vec::new();
    let mut steps = Vec::new();
    let mut windows = Vec::new();
    let mut steps_total = 0u64;
    let step_dist = (model.steps.awake_steps_per_bucket > 0.0)
        .then(|| Poisson::new(model.steps.awake_steps_per_bucket).expect("validated step rate"));
    let n_bouts = hours * HOUR_MS / STEP_BUCKET_MS;
    let motion = &model.motion;
    for b in 0..n_bouts {
        let range = TimeRange::new(start + b * STEP_BUCKET_MS, start + (b + 1) * STEP_BUCKET_MS);
        let state = sleep.state_of(&range, 0.5);
        let (acc_e, gyr_e) = match state {
            State::Awake => (motion.acc.awake, motion.gyr.awake),
            State::Asleep => (motion.acc.asleep, motion.gyr.asleep),
        };
        let acc_energy = gamma_draw(&mut rng, acc_e, energy_scale);
        let gyr_energy = gamma_draw(&mut rng, gyr_e, energy_scale);
        let n_steps = match (state, &step_dist) {
            (State::Awake, Some(d)) => d.sample(&mut rng) as u32,
            _ => 0,
        };
        let dropped = is_dropped(range.start);
        if !dropped {
            motion_samples(
                &mut rng,
                range,
                spec.motion_rate_hz,
                acc_energy,
                motion.norm_jitter,
                &mut acc,
            );
            motion_samples(
                &mut rng,
                range,
                spec.motion_rate_hz,
                gyr_energy,
                motion.norm_jitter,
                &mut gyr,
            );
            steps.push(StepRecord {
                bucket_start: range.start,
                steps: n_steps,
            });
            steps_total += u64::from(n_steps);
        }
        windows.push(WindowTruth {
            start: range.start,
            state,
            acc_energy,
            gyr_energy,
            dropped,
        });
    }

    // Beats.
    let rm = &model.rr;
    let hour_mix: Vec<f64> = (0..hours)
        .map(|_| {
            (rm.white_mix + mix_offset + rm.white_mix_hour_sd * normal(&mut rng)).clamp(0.0, 1.0)
        })
        .collect();
    let ar_innovation = Normal::new(0.0, rm.noise_sd_ms * (1.0 - rm.ar_coef * rm.ar_coef).sqrt())
        .expect("validated noise");
    let hf_phase = rng.random::<f64>() * TAU;
    let mut ar = rm.noise_sd_ms * normal(&mut rng);
    let mut t = start as f64;
    let mut beats: Vec<(f64, f64)> = Vec::new();
    while t < recording.end as f64 {
        let state = if sleep.asleep_ms(&TimeRange::new(t as i64, t as i64 + 1)) > 0 {
            State::Asleep
        } else {
            State::Awake
        };
        let base = match state {
            State::Awake => rm.awake_rr_ms,
            State::Asleep => rm.asleep_rr_ms,
        } + rr_offset_ms;
        let hour = (((t - start as f64) / HOUR_MS as f64) as usize).min(hour_mix.len() - 1);
        let w = hour_mix[hour];
        ar = rm.ar_coef * ar + ar_innovation.sample(&mut rng);
        let white = rm.noise_sd_ms * normal(&mut rng);
        let noise = (1.0 - w).sqrt() * ar + w.sqrt() * white;
        let ts = (t - start as f64) / 1000.0;
        let rr = base
            + rm.lf_amp_ms * (TAU * LF_HZ * ts).sin()
            + rm.hf_amp_ms * (TAU * HF_HZ * ts + hf_phase).sin()
            + noise;
        let rr = rr.clamp(320.0, 1900.0).round();
        t += rr;
        beats.push((t, rr));
    }
    let n_bad = (model.artifacts.out_of_range_rate * beats.len() as f64).round() as usize;
    for i in index::sample(&mut rng, beats.len(), n_bad) {
        beats[i].1 = if rng.random::<bool>() {
            OUT_OF_RANGE_HIGH
        } else {
            OUT_OF_RANGE_LOW
        };
    }

    // 5 Hz reports of the latest beat.
    let mut rr_rows = Vec::with_capacity((hours * HOUR_MS / TICK_MS) as usize);
    let mut next = 0;
    let mut current: Option<f64> = None;
    let mut tick = start;
    while tick < recording.end {
        while next < beats.len() && beats[next].0 <= tick as f64 {
            current = Some(beats[next].1);
            next += 1;
        }
        if let Some(v) = current {
            if !is_dropped(tick) {
                rr_rows.push(RawRRSample {
                    t_ms: tick,
                    rr_ms: v,
                });
            }
        }
        tick += TICK_MS;
    }
    let n_dup = (model.artifacts.duplicate_row_rate * rr_rows.len() as f64).round() as usize;
    let rr_count = rr_rows.len();
    let mut dup_idx = index::sample(&mut rng, rr_count, n_dup).into_vec();
    dup_idx.sort_unstable();
    let mut rr = Vec::with_capacity(rr_count + n_dup);
    let mut d = 0;
    for (i, row) in rr_rows.into_iter().enumerate() {
        rr.push(row);
        if d < dup_idx.len() && dup_idx[d] == i {
            rr.push(row);
            d += 1;
        }
    }

    let asleep_ms = sleep.asleep_ms(&recording);
    let last_date = zone.local_date(recording.end - 1);
    let manifest = Manifest {
        subject_id: id.clone(),
        group: group.group,
        timezone: spec.timezone.clone(),
        recording: Some(DateRange::new(start_date, last_date)?),
        acc_rate_hz: spec.motion_rate_hz,
        gyr_rate_hz: spec.motion_rate_hz,
    };
    let truth = SubjectTruth {
        subject_id: id,
        group: group.group,
        recording,
        energy_scale,
        rr_offset_ms,
        mix_offset,
        hours: hour_mix
            .iter()
            .enumerate()
            .map(|(h, &white_mix)| {
                let range =
                    TimeRange::new(start + h as i64 * HOUR_MS, start + (h as i64 + 1) * HOUR_MS);
                HourTruth {
                    start: range.start,
                    state: sleep.state_of(&range, 0.5),
                    white_mix,
                    dropped: is_dropped(range.start),
                }
            })
            .collect(),
        beats: beats.len(),
        out_of_range_beats: n_bad,
        rr_rows: rr_count,
        duplicate_rows: n_dup,
        dropout_hours,
        asleep_ms,
        steps_total,
        windows,
    };
    let data = SubjectData {
        manifest,
        zone,
        acc,
        gyr,
        rr,
        sleep,
        steps,
        reports: Vec::new(),
    };
    Ok((data, truth))
}

/// Writes every subject under `out_dir`, plus the ground truth and a
/// ready-to-run config listing the subjects.
pub fn generate_cohort(spec: &CohortSpec, seed: u64, out_dir: &Path) -> Result<CohortTruth> {
    spec.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let roster = spec.roster();
    let subjects = roster
        .par_iter()
        .map(|(group, i)| {
            let (data, truth) = generate_subject(spec, group, *i, seed)?;
            write_subject_dir(&out_dir.join(&truth.subject_id), &data)?;
            Ok(truth)
        })
        .collect::<Result<Vec<SubjectTruth>>>()?;

    let config = Config::new(
        subjects
            .iter()
            .map(|s| PathBuf::from(&s.subject_id))
            .collect(),
    );
    config.save(&out_dir.join(CONFIG_FILE))?;
    let truth = CohortTruth {
        seed,
        spec: spec.clone(),
        subjects,
    };
    let path = out_dir.join(GROUND_TRUTH_FILE);
    let text = serde_json::to_string(&truth)? + "\n";
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(truth)
}
