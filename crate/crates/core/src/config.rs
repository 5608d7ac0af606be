//! Versioned JSON run configuration.
//!
//! Relative paths resolve against the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregate::{DailyParams, StdConvention};
use crate::error::{Error, Result};
use crate::features::Tolerance;
use crate::ingest::{CleaningParams, WindowParams};
use crate::stats::ComparisonConfig;
use crate::time::DateRange;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureParams {
    pub sampen_m: usize,
    pub sampen_r: Tolerance,
    pub higuchi_kmax: usize,
    pub mfd_max_scale: usize,
    pub lomb_oversampling: f64,
    pub lomb_f_min: f64,
    pub lomb_f_max: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            sampen_m: 2,
            sampen_r: Tolerance::default(),
            higuchi_kmax: crate::features::higuchi::DEFAULT_KMAX,
            mfd_max_scale: crate::features::mfd::DEFAULT_MAX_SCALE,
            lomb_oversampling: 4.0,
            lomb_f_min: 0.003,
            lomb_f_max: 0.40,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregationParams {
    pub std: StdConvention,
    pub daily: DailyParams,
}

/// Everything that changes extracted feature files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionParams {
    pub exclusions: Vec<DateRange>,
    pub cleaning: CleaningParams,
    pub windows: WindowParams,
    pub features: FeatureParams,
    pub aggregation: AggregationParams,
}

impl ExtractionParams {
    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("parameters serialize");
        hex(&Sha256::digest(&json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    /// Subject directories.
    pub subjects: Vec<PathBuf>,
    /// Local date ranges dropped from every subject.
    #[serde(default)]
    pub exclusions: Vec<DateRange>,
    #[serde(default)]
    pub cleaning: CleaningParams,
    #[serde(default)]
    pub windows: WindowParams,
    #[serde(default)]
    pub features: FeatureParams,
    #[serde(default)]
    pub aggregation: AggregationParams,
    #[serde(default)]
    pub stats: ComparisonConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn new(subjects: Vec<PathBuf>) -> Self {
        Self {
            version: CONFIG_VERSION,
            subjects,
            exclusions: Vec::new(),
            cleaning: CleaningParams::default(),
            windows: WindowParams::default(),
            features: FeatureParams::default(),
            aggregation: AggregationParams::default(),
            stats: ComparisonConfig::default(),
            output_dir: default_output_dir(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Config = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from("."));
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.version != CONFIG_VERSION {
            return fail(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        if self.subjects.is_empty() {
            return fail("no subjects listed".into());
        }
        let c = &self.cleaning;
        if !(c.min_rr_ms > 0.0 && c.max_rr_ms > c.min_rr_ms && c.max_fill_ms >= 0.0) {
            return fail(format!("bad cleaning bounds {c:?}"));
        }
        let w = &self.windows;
        if w.motion_window_ms <= 0 || w.hrv_window_ms <= 0 {
            return fail("window lengths must be positive".into());
        }
        for (name, v) in [
            ("min_motion_fraction", w.min_motion_fraction),
            ("min_rr_coverage", w.min_rr_coverage),
            ("asleep_fraction", w.asleep_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} = {v} outside [0, 1]"));
            }
        }
        let f = &self.features;
        if f.sampen_m == 0 || f.higuchi_kmax < 2 || f.mfd_max_scale < 3 {
            return fail(format!("bad feature parameters {f:?}"));
        }
        let r_ok = match f.sampen_r {
            Tolerance::Absolute(r) | Tolerance::StdFraction(r) => r > 0.0,
        };
        if !r_ok {
            return fail("sample entropy tolerance must be positive".into());
        }
        if !(f.lomb_oversampling > 0.0 && f.lomb_f_min >= 0.0 && f.lomb_f_max > f.lomb_f_min) {
            return fail("bad periodogram grid".into());
        }
        if !(self.stats.alpha > 0.0 && self.stats.alpha < 1.0) {
            return fail(format!("alpha {} outside (0, 1)", self.stats.alpha));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn subject_dirs(&self) -> Vec<PathBuf> {
        self.subjects.iter().map(|p| self.resolve(p)).collect()
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn extraction(&self) -> ExtractionParams {
        ExtractionParams {
            exclusions: self.exclusions.clone(),
            cleaning: self.cleaning.clone(),
            windows: self.windows.clone(),
            features: self.features.clone(),
            aggregation: self.aggregation.clone(),
        }
    }
}
