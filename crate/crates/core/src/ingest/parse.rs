//! Subject directory layout:
//!
//! ```text
//! manifest.json   subject_id, group, timezone, optional recording date range
//! acc.csv         t_ms,x,y,z
//! gyr.csv         t_ms,x,y,z
//! rr.csv          t_ms,rr_ms
//! sleep.csv       start_ms,end_ms
//! steps.csv       bucket_start_ms,steps
//! ```
//!
//! Missing stream files yield empty streams with a warning. Malformed lines
//! are skipped and counted; more than 1% malformed lines in a file is fatal.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Group, RawRRSample, RawSample, SleepSchedule, StepRecord, STEP_BUCKET_MS};
use crate::time::{DateRange, LocalZone, TimeRange};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ACC_FILE: &str = "acc.csv";
pub const GYR_FILE: &str = "gyr.csv";
pub const RR_FILE: &str = "rr.csv";
pub const SLEEP_FILE: &str = "sleep.csv";
pub const STEPS_FILE: &str = "steps.csv";

const MAX_MALFORMED_FRACTION: f64 = 0.01;

fn default_rate() -> f64 {
    20.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subject_id: String,
    pub group: Group,
    pub timezone: String,
    /// Local dates of the recording; samples outside are ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recording: Option<DateRange>,
    #[serde(default = "default_rate")]
    pub acc_rate_hz: f64,
    #[serde(default = "default_rate")]
    pub gyr_rate_hz: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub file: String,
    pub missing: bool,
    pub rows: usize,
    pub malformed: usize,
    pub duplicate_rows: usize,
}

/// Everything read from one subject directory, streams sorted by time.
#[derive(Clone, Debug)]
pub struct SubjectData {
    pub manifest: Manifest,
    pub zone: LocalZone,
    pub acc: Vec<RawSample>,
    pub gyr: Vec<RawSample>,
    pub rr: Vec<RawRRSample>,
    pub sleep: SleepSchedule,
    pub steps: Vec<StepRecord>,
    pub reports: Vec<FileReport>,
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    if !(manifest.acc_rate_hz > 0.0 && manifest.gyr_rate_hz > 0.0) {
        return Err(Error::Parse {
            path,
            message: "sample rates must be positive".into(),
        });
    }
    Ok(manifest)
}

pub fn parse_subject_dir(dir: &Path) -> Result<SubjectData> {
    let manifest = read_manifest(dir)?;
    let zone = LocalZone::parse(&manifest.timezone)?;
    let span = manifest
        .recording
        .as_ref()
        .map(|r| zone.date_range(r))
        .transpose()?;
    let mut reports = Vec::new();

    let mut acc = read_motion(&dir.join(ACC_FILE), &mut reports)?;
    let mut gyr = read_motion(&dir.join(GYR_FILE), &mut reports)?;
    let mut rr = read_table(&dir.join(RR_FILE), &["t_ms", "rr_ms"], &mut reports, |f| {
        let t_ms = int(f[0])?;
        let rr_ms = real(f[1])?;
        Some(RawRRSample { t_ms, rr_ms })
    })?;
    let sleep_rows = read_table(
        &dir.join(SLEEP_FILE),
        &["start_ms", "end_ms"],
        &mut reports,
        |f| {
            let r = TimeRange::new(int(f[0])?, int(f[1])?);
            (r.end > r.start).then_some(r)
        },
    )?;
    let mut steps = read_table(
        &dir.join(STEPS_FILE),
        &["bucket_start_ms", "steps"],
        &mut reports,
        |f| {
            let bucket_start = int(f[0])?;
            let steps = f[1].trim().parse::<u32>().ok()?;
            (bucket_start.rem_euclid(STEP_BUCKET_MS) == 0).then_some(StepRecord {
                bucket_start,
                steps,
            })
        },
    )?;

    let acc_dups = sort_unique(&mut acc, |s| s.t_ms, &dir.join(ACC_FILE))?;
    let gyr_dups = sort_unique(&mut gyr, |s| s.t_ms, &dir.join(GYR_FILE))?;
    let rr_dups = sort_unique(&mut rr, |s| s.t_ms, &dir.join(RR_FILE))?;
    let step_dups = sort_unique(&mut steps, |s| s.bucket_start, &dir.join(STEPS_FILE))?;
    for (name, n) in [
        (ACC_FILE, acc_dups),
        (GYR_FILE, gyr_dups),
        (RR_FILE, rr_dups),
        (STEPS_FILE, step_dups),
    ] {
        if let Some(r) = reports.iter_mut().find(|r| r.file == name) {
            r.duplicate_rows = n;
        }
    }

    if let Some(span) = span {
        acc.retain(|s| span.contains(s.t_ms));
        gyr.retain(|s| span.contains(s.t_ms));
        rr.retain(|s| span.contains(s.t_ms));
        steps.retain(|s| span.contains(s.bucket_start));
    }

    let sleep = SleepSchedule::merged(sleep_rows)?;

    Ok(SubjectData {
        manifest,
        zone,
        acc,
        gyr,
        rr,
        sleep,
        steps,
        reports,
    })
}

fn int(s: &str) -> Option<i64> {
    s.trim().parse().ok()
}

fn real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn read_motion(path: &Path, reports: &mut Vec<FileReport>) -> Result<Vec<RawSample>> {
    read_table(path, &["t_ms", "x", "y", "z"], reports, |f| {
        Some(RawSample {
            t_ms: int(f[0])?,
            x: real(f[1])?,
            y: real(f[2])?,
            z: real(f[3])?,
        })
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_table<T>(
    path: &Path,
    header: &[&str],
    reports: &mut Vec<FileReport>,
    parse: impl Fn(&[&str]) -> Option<T>,
) -> Result<Vec<T>> {
    let mut report = FileReport {
        file: file_name(path),
        ..FileReport::default()
    };
    if !path.exists() {
        warn!("{} missing; stream left empty", path.display());
        report.missing = true;
        reports.push(report);
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let found = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    if found.is_empty() {
        warn!("{} is empty", path.display());
        reports.push(report);
        return Ok(Vec::new());
    }
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a.trim() != *b) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!(
                "unexpected header `{}`, expected `{}`",
                found.iter().collect::<Vec<_>>().join(","),
                header.join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                report.rows += 1;
                let fields: Vec<&str> = record.iter().collect();
                let parsed = if fields.len() == header.len() {
                    parse(&fields)
                } else {
                    None
                };
                match parsed {
                    Some(v) => rows.push(v),
                    None => report.malformed += 1,
                }
            }
            Err(e) if matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) => {
                report.rows += 1;
                report.malformed += 1;
            }
            Err(e) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })
            }
        }
    }

    if report.rows > 0 {
        let fraction = report.malformed as f64 / report.rows as f64;
        if fraction > MAX_MALFORMED_FRACTION {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!(
                    "{} of {} lines malformed ({:.2}% > 1%)",
                    report.malformed,
                    report.rows,
                    100.0 * fraction
                ),
            });
        }
        if report.malformed > 0 {
            warn!(
                "{}: skipped {} malformed lines",
                path.display(),
                report.malformed
            );
        }
    }
    reports.push(report);
    Ok(rows)
}

/// Sorts by timestamp. Exact duplicate rows collapse; conflicting rows
/// sharing a timestamp are an error.
fn sort_unique<T: PartialEq>(
    rows: &mut Vec<T>,
    key: impl Fn(&T) -> i64,
    path: &Path,
) -> Result<usize> {
    rows.sort_by_key(|r| key(r));
    let before = rows.len();
    let mut conflict = None;
    rows.dedup_by(|b, a| {
        if key(a) == key(b) {
            if a != b && conflict.is_none() {
                conflict = Some(key(a));
            }
            true
        } else {
            false
        }
    });
    if let Some(t) = conflict {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("conflicting samples share timestamp {t}"),
        });
    }
    Ok(before - rows.len())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::with_capacity(1 << 20, f))
}

fn write_lines<T>(
    path: &Path,
    header: &str,
    rows: &[T],
    mut line: impl FnMut(&mut BufWriter<File>, &T) -> std::io::Result<()>,
) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for r in rows {
        line(&mut w, r).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes `data` in the directory layout read by [`parse_subject_dir`].
pub fn write_subject_dir(dir: &Path, data: &SubjectData) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&data.manifest)?;
    fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;

    for (name, rows) in [(ACC_FILE, &data.acc), (GYR_FILE, &data.gyr)] {
        write_lines(&dir.join(name), "t_ms,x,y,z", rows, |w, s| {
            writeln!(w, "{},{},{},{}", s.t_ms, s.x, s.y, s.z)
        })?;
    }
    write_lines(&dir.join(RR_FILE), "t_ms,rr_ms", &data.rr, |w, s| {
        writeln!(w, "{},{}", s.t_ms, s.rr_ms)
    })?;
    write_lines(
        &dir.join(SLEEP_FILE),
        "start_ms,end_ms",
        data.sleep.intervals(),
        |w, r| writeln!(w, "{},{}", r.start, r.end),
    )?;
    write_lines(
        &dir.join(STEPS_FILE),
        "bucket_start_ms,steps",
        &data.steps,
        |w, s| writeln!(w, "{},{}", s.bucket_start, s.steps),
    )?;
    Ok(dir.to_path_buf())
}
