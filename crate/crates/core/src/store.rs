//! Per-subject feature files: `<id>.csv` records plus a `<id>.json` sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DailyStats, FeatureName, FeatureRecord, Group, State};

/// Window counts of one subject as printed by `extract`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub motion_awake: usize,
    pub motion_asleep: usize,
    pub hrv_awake: usize,
    pub hrv_asleep: usize,
    /// Motion windows with data but below the sample threshold.
    pub motion_invalid: usize,
    /// HRV windows with beats but insufficient coverage.
    pub hrv_invalid: usize,
}

impl WindowCounts {
    pub fn add(&mut self, other: &WindowCounts) {
        self.motion_awake += other.motion_awake;
        self.motion_asleep += other.motion_asleep;
        self.hrv_awake += other.hrv_awake;
        self.hrv_asleep += other.hrv_asleep;
        self.motion_invalid += other.motion_invalid;
        self.hrv_invalid += other.hrv_invalid;
    }

    /// Labelled counts in display order.
    pub fn rows(&self) -> [(&'static str, usize); 4] {
        [
            ("# 10 min. mov (awake)", self.motion_awake),
            ("# 1 hour HRV (awake)", self.hrv_awake),
            ("# 10 min. mov (sleep)", self.motion_asleep),
            ("# 1 hour HRV (sleep)", self.hrv_asleep),
        ]
    }
}

/// Everything extracted from one subject.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectExtract {
    pub subject_id: String,
    pub group: Group,
    pub counts: WindowCounts,
    pub daily: DailyStats,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub records: Vec<FeatureRecord>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    fingerprint: String,
    #[serde(flatten)]
    extract: SubjectExtract,
}

pub fn records_path(dir: &Path, subject_id: &str) -> PathBuf {
    dir.join(format!("{subject_id}.csv"))
}

pub fn sidecar_path(dir: &Path, subject_id: &str) -> PathBuf {
    dir.join(format!("{subject_id}.json"))
}

#[derive(Serialize, Deserialize)]
struct Row {
    subject_id: String,
    feature_name: FeatureName,
    state: State,
    window_start_ms: i64,
    value: f64,
}

pub fn write_records(path: &Path, records: &[FeatureRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    for r in records {
        w.serialize(Row {
            subject_id: r.subject_id.clone(),
            feature_name: r.feature,
            state: r.state,
            window_start_ms: r.window_start,
            value: r.value,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<FeatureRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            Error::io(path, std::io::Error::new(io.kind(), "feature file missing"))
        }
        _ => Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
    })?;
    reader
        .deserialize::<Row>()
        .map(|row| {
            let row = row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            Ok(FeatureRecord {
                subject_id: row.subject_id,
                feature: row.feature_name,
                window_start: row.window_start_ms,
                state: row.state,
                value: row.value,
            })
        })
        .collect()
}

/// Writes records and sidecar; the sidecar goes last so its presence marks
/// a complete extract.
pub fn save_extract(dir: &Path, extract: &SubjectExtract, fingerprint: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let sidecar = sidecar_path(dir, &extract.subject_id);
    if sidecar.exists() {
        fs::remove_file(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    }
    write_records(&records_path(dir, &extract.subject_id), &extract.records)?;
    let body = Sidecar {
        fingerprint: fingerprint.to_string(),
        extract: extract.clone(),
    };
    let text = serde_json::to_string_pretty(&body)? + "\n";
    fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))
}

/// Fingerprint stored with a subject's extract, if a complete one exists.
pub fn cached_fingerprint(dir: &Path, subject_id: &str) -> Option<String> {
    let text = fs::read_to_string(sidecar_path(dir, subject_id)).ok()?;
    let sidecar: Sidecar = serde_json::from_str(&text).ok()?;
    records_path(dir, subject_id)
        .exists()
        .then_some(sidecar.fingerprint)
}

pub fn load_extract(dir: &Path, subject_id: &str) -> Result<SubjectExtract> {
    let path = sidecar_path(dir, subject_id);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let mut extract = sidecar.extract;
    extract.records = read_records(&records_path(dir, subject_id))?;
    Ok(extract)
}
