//! Subject-level extraction (cleaning, windowing, features, daily statistics)
//! and the cohort report built from the extracts.

use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::aggregate::{daily_stats, summarize_subject, RecordedWindow};
use crate::config::{Config, ExtractionParams};
use crate::error::{Error, Result};
use crate::features::{
    band_powers, higuchi_fd, mfd_summaries, poincare, sample_entropy, short_time_energy,
    FrequencyGrid, LombScargle,
};
use crate::ingest::{
    clean_rr, parse_subject_dir, read_manifest, segment_windows, Streams, SubjectData,
};
use crate::model::{FeatureName, FeatureRecord, RRSeries, State, SubjectSummary};
use crate::stats::{render_boxplots, render_csv, render_markdown, run_comparisons, Comparison};
use crate::store::{cached_fingerprint, load_extract, save_extract, SubjectExtract, WindowCounts};
use crate::time::TimeRange;

/// Feature values of one HRV window and notes on features that failed.
type HrvValues = (Vec<(FeatureName, f64)>, Vec<String>);

/// Extraction parameters plus the periodogram plan they imply.
pub struct Extractor {
    pub params: ExtractionParams,
    lomb: LombScargle,
}

impl Extractor {
    pub fn new(params: ExtractionParams) -> Result<Self> {
        let f = &params.features;
        let grid = FrequencyGrid::new(
            params.windows.hrv_window_ms as f64 / 1000.0,
            f.lomb_oversampling,
            f.lomb_f_min,
            f.lomb_f_max,
        )?;
        Ok(Self {
            params,
            lomb: LombScargle::new(grid),
        })
    }

    /// Extracts every feature record and the daily statistics of one subject.
    pub fn extract_subject(&self, data: &SubjectData) -> Result<SubjectExtract> {
        let p = &self.params;
        let id = &data.manifest.subject_id;
        let beats = clean_rr(&data.rr, &p.cleaning);
        let exclusions = p
            .exclusions
            .iter()
            .map(|r| data.zone.date_range(r))
            .collect::<Result<Vec<TimeRange>>>()?;
        let streams = Streams {
            acc: &data.acc,
            gyr: &data.gyr,
            beats: &beats,
            acc_rate_hz: data.manifest.acc_rate_hz,
            gyr_rate_hz: data.manifest.gyr_rate_hz,
        };
        let segments = segment_windows(
            &streams,
            &data.steps,
            &data.sleep,
            &exclusions,
            &data.zone,
            &p.windows,
        );

        let mut counts = WindowCounts::default();
        let mut flags = Vec::new();
        let mut records = Vec::new();
        let min_fraction = p.windows.min_motion_fraction;
        for (feature, segs) in [
            (FeatureName::AccSte, &segments.acc),
            (FeatureName::GyrSte, &segments.gyr),
        ] {
            for seg in segs {
                if feature == FeatureName::AccSte {
                    match (seg.valid, seg.state) {
                        (false, _) => counts.motion_invalid += 1,
                        (true, State::Awake) => counts.motion_awake += 1,
                        (true, State::Asleep) => counts.motion_asleep += 1,
                    }
                }
                if !seg.valid {
                    continue;
                }
                let value = short_time_energy(&seg.window, min_fraction)?;
                records.push(FeatureRecord {
                    subject_id: id.clone(),
                    feature,
                    window_start: seg.window.window_start,
                    state: seg.state,
                    value,
                });
            }
        }

        for seg in &segments.hrv {
            match (&seg.series, seg.state) {
                (Err(_), _) => counts.hrv_invalid += 1,
                (Ok(_), State::Awake) => counts.hrv_awake += 1,
                (Ok(_), State::Asleep) => counts.hrv_asleep += 1,
            }
        }
        let hrv: Vec<HrvValues> = segments
            .hrv
            .par_iter()
            .map(|seg| match &seg.series {
                Ok(series) => self.hrv_features(series),
                Err(reason) => {
                    debug!("{id}: HRV window at {} invalid: {reason}", seg.range.start);
                    (Vec::new(), Vec::new())
                }
            })
            .collect();
        for (seg, (values, notes)) in segments.hrv.iter().zip(hrv) {
            for (feature, value) in values {
                records.push(FeatureRecord {
                    subject_id: id.clone(),
                    feature,
                    window_start: seg.range.start,
                    state: seg.state,
                    value,
                });
            }
            flags.extend(
                notes
                    .into_iter()
                    .map(|n| format!("window {}: {n}", seg.range.start)),
            );
        }
        records.sort_by(|a, b| (a.window_start, a.feature).cmp(&(b.window_start, b.feature)));

        let mut recorded: Vec<RecordedWindow> = segments
            .acc
            .iter()
            .chain(&segments.gyr)
            .filter(|s| s.valid)
            .map(|s| RecordedWindow {
                range: s.window.range(),
                state: s.state,
            })
            .collect();
        recorded.sort_by_key(|w| w.range.start);
        recorded.dedup_by_key(|w| w.range.start);
        let daily = daily_stats(
            &recorded,
            &segments.steps,
            &data.zone,
            &p.aggregation.daily,
            p.aggregation.std,
        );
        if !daily.eligible {
            flags.push(format!(
                "ineligible for daily tests: {} qualifying days",
                daily.qualifying_days
            ));
        }

        Ok(SubjectExtract {
            subject_id: id.clone(),
            group: data.manifest.group,
            counts,
            daily,
            flags,
            records,
        })
    }

    /// All HRV features of one valid window; failures become notes.
    fn hrv_features(&self, series: &RRSeries) -> HrvValues {
        let f = &self.params.features;
        let x = &series.intervals;
        let mut out = Vec::with_capacity(12);
        let mut notes = Vec::new();
        match sample_entropy(x, f.sampen_m, f.sampen_r) {
            Ok(v) if v.is_finite() => out.push((FeatureName::SampEn, v)),
            Ok(_) => notes.push("sampen undefined (no matches of length m + 1)".to_string()),
            Err(e) => notes.push(format!("sampen: {e}")),
        }
        match higuchi_fd(x, f.higuchi_kmax) {
            Ok(fd) => {
                if fd.clamped {
                    notes.push(format!("higuchi clamped from {:.4}", fd.raw));
                }
                out.push((FeatureName::Higuchi, fd.value));
            }
            Err(e) => notes.push(format!("higuchi: {e}")),
        }
        match mfd_summaries(x, f.mfd_max_scale) {
            Ok(s) => out.extend([
                (FeatureName::MfdFd1, s.fd1),
                (FeatureName::MfdMin, s.min),
                (FeatureName::MfdMax, s.max),
                (FeatureName::MfdMean, s.mean),
                (FeatureName::MfdStd, s.std),
            ]),
            Err(e) => notes.push(format!("mfd: {e}")),
        }
        match poincare(x) {
            Ok(p) => {
                if p.sd2_clamped {
                    notes.push("sd2 clamped at 0".to_string());
                }
                out.extend([(FeatureName::Sd1, p.sd1), (FeatureName::Sd2, p.sd2)]);
            }
            Err(e) => notes.push(format!("poincare: {e}")),
        }
        match self.lomb.of_series(series).and_then(|pg| band_powers(&pg)) {
            Ok(b) => {
                out.extend([
                    (FeatureName::LfPower, b.lf_norm),
                    (FeatureName::HfPower, b.hf_norm),
                ]);
                match b.lf_hf_ratio {
                    Some(r) => out.push((FeatureName::LfHfRatio, r)),
                    None => notes.push("lf/hf undefined".to_string()),
                }
            }
            Err(e) => notes.push(format!("spectrum: {e}")),
        }
        out.sort_by_key(|(name, _)| *name);
        (out, notes)
    }

    /// Per-subject summary from an extract.
    pub fn summarize(&self, extract: &SubjectExtract) -> SubjectSummary {
        let mut s = summarize_subject(
            &extract.subject_id,
            extract.group,
            &extract.records,
            extract.daily.clone(),
            self.params.aggregation.std,
        );
        if !extract.daily.eligible {
            s.flags.push("ineligible for daily tests".to_string());
        }
        s
    }
}

/// Outcome of extracting one subject directory.
#[derive(Debug)]
pub enum ExtractOutcome {
    Computed(SubjectExtract),
    Cached(SubjectExtract),
    Failed { dir: PathBuf, error: Error },
}

/// Extracts every configured subject into `out/features`, reusing cached
/// extracts whose parameters and inputs are unchanged unless `force` is set.
pub fn run_extract(config: &Config, out_dir: &Path, force: bool) -> Result<Vec<ExtractOutcome>> {
    let extractor = Extractor::new(config.extraction())?;
    let feature_dir = out_dir.join("features");
    let params_fp = extractor.params.fingerprint();
    let outcomes = config
        .subject_dirs()
        .par_iter()
        .map(
            |dir| match extract_dir(&extractor, dir, &feature_dir, &params_fp, force) {
                Ok(outcome) => outcome,
                Err(error) => {
                    warn!("{}: {error}", dir.display());
                    ExtractOutcome::Failed {
                        dir: dir.clone(),
                        error,
                    }
                }
            },
        )
        .collect();
    Ok(outcomes)
}

/// Cache key: parameter fingerprint plus input file sizes and modification times.
fn input_fingerprint(params_fp: &str, dir: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(params_fp.as_bytes());
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .collect();
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let meta = entry.metadata().map_err(|e| Error::io(entry.path(), e))?;
        let modified = meta
            .modified()
            .ok()
            .and_then(|t| t.duration_since(std::time::UNIX_EPOCH).ok())
            .map(|d| d.as_nanos())
            .unwrap_or(0);
        hasher.update(entry.file_name().as_encoded_bytes());
        hasher.update(meta.len().to_le_bytes());
        hasher.update(modified.to_le_bytes());
    }
    Ok(crate::config::hex(&hasher.finalize()))
}

fn extract_dir(
    extractor: &Extractor,
    dir: &Path,
    feature_dir: &Path,
    params_fp: &str,
    force: bool,
) -> Result<ExtractOutcome> {
    let manifest = read_manifest(dir)?;
    let id = manifest.subject_id.clone();
    let fingerprint = input_fingerprint(params_fp, dir)?;
    if !force && cached_fingerprint(feature_dir, &id).as_deref() == Some(fingerprint.as_str()) {
        info!("{id}: cached");
        return Ok(ExtractOutcome::Cached(load_extract(feature_dir, &id)?));
    }
    let data = parse_subject_dir(dir)?;
    let extract = extractor.extract_subject(&data)?;
    save_extract(feature_dir, &extract, &fingerprint)?;
    info!("{id}: {} records", extract.records.len());
    Ok(ExtractOutcome::Computed(extract))
}

/// Loads the extracts of every configured subject; all missing subjects are
/// reported together.
pub fn load_extracts(config: &Config, out_dir: &Path) -> Result<Vec<SubjectExtract>> {
    let feature_dir = out_dir.join("features");
    let mut extracts = Vec::new();
    let mut missing = Vec::new();
    for dir in config.subject_dirs() {
        let id = match read_manifest(&dir) {
            Ok(m) => m.subject_id,
            Err(_) => {
                missing.push(dir.display().to_string());
                continue;
            }
        };
        match load_extract(&feature_dir, &id) {
            Ok(e) => extracts.push(e),
            Err(Error::Io { .. }) => missing.push(id),
            Err(e) => return Err(e),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingSubjects(missing));
    }
    extracts.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    Ok(extracts)
}

pub const REPORT_MD: &str = "report.md";
pub const REPORT_CSV: &str = "report.csv";
pub const BOXPLOTS_JSON: &str = "boxplots.json";
pub const SUMMARIES_JSON: &str = "summaries.json";

/// Subject summaries and group comparisons from the stored extracts.
pub fn build_report(config: &Config, out_dir: &Path) -> Result<(Vec<SubjectSummary>, Comparison)> {
    let extractor = Extractor::new(config.extraction())?;
    let extracts = load_extracts(config, out_dir)?;
    let summaries: Vec<SubjectSummary> = extracts.iter().map(|e| extractor.summarize(e)).collect();
    for s in &summaries {
        for flag in &s.flags {
            debug!("{}: {flag}", s.subject_id);
        }
    }
    let comparison = run_comparisons(&summaries, &config.stats)?;
    Ok((summaries, comparison))
}

/// Writes the Markdown and CSV reports, boxplot JSON and subject summaries.
pub fn run_report(config: &Config, out_dir: &Path) -> Result<Comparison> {
    let (summaries, comparison) = build_report(config, out_dir)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = [
        (REPORT_MD, render_markdown(&comparison)),
        (REPORT_CSV, render_csv(&comparison)?),
        (BOXPLOTS_JSON, render_boxplots(&comparison)?),
        (
            SUMMARIES_JSON,
            serde_json::to_string_pretty(&summaries)? + "\n",
        ),
    ];
    for (name, text) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(comparison)
}
