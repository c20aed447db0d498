use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gelfand::{BranchOptions, IterationOptions, Nonlinearity};

pub const MIN_POINTS: usize = 8;
pub const MAX_POINTS: usize = 4096;

/// A rejected configuration value, reported with the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearityConfig {
    pub name: String,
    pub p: Option<f64>,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self {
            name: "exp".into(),
            p: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Sup-norm step at which the monotone iteration stops.
    pub iteration: f64,
    /// Threshold on `μ1` for semistability verdicts.
    pub eigen: f64,
    /// Width of the `λ*` bracket.
    pub lambda_bracket: f64,
    /// Divergence cap on `sup u`; the nonlinearity's default when absent.
    pub sup_cap: Option<f64>,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            iteration: 1e-10,
            eigen: 1e-8,
            lambda_bracket: 1e-3,
            sup_cap: None,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchConfig {
    pub max_points: usize,
    pub lambda_step: f64,
    pub step_shrink: f64,
    pub stop_mu1: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        let d = BranchOptions::default();
        Self {
            max_points: d.max_points,
            lambda_step: d.lambda_step_init,
            step_shrink: d.step_shrink,
            stop_mu1: d.stop_mu1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalConfig {
    pub n_list: Vec<u32>,
    pub s_list: Vec<f64>,
    pub format: TableFormat,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        Self {
            n_list: vec![7, 8, 9, 10],
            s_list: vec![1.0, 2.0],
            format: TableFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GammaTableConfig {
    pub n_list: Vec<u32>,
    pub s_list: Vec<f64>,
}

impl Default for GammaTableConfig {
    fn default() -> Self {
        Self {
            n_list: (1..=12).collect(),
            s_list: (1..=9).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Restricts the suite to these checks; empty runs all of them.
    pub only: Vec<String>,
}

/// Output locations. Not part of the configuration hash.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub table: Option<PathBuf>,
}

/// Fully resolved run configuration: file values, then flag overrides.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub s: f64,
    #[serde(rename = "N", alias = "n_points")]
    pub n_points: usize,
    pub nonlinearity: NonlinearityConfig,
    pub tolerances: Tolerances,
    pub branch: BranchConfig,
    pub critical: CriticalConfig,
    pub gamma_table: GammaTableConfig,
    pub verify: VerifyConfig,
    #[serde(skip_serializing)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            s: 0.75,
            n_points: 256,
            nonlinearity: NonlinearityConfig::default(),
            tolerances: Tolerances::default(),
            branch: BranchConfig::default(),
            critical: CriticalConfig::default(),
            gamma_table: GammaTableConfig::default(),
            verify: VerifyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("config", e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(ConfigError::new("s", format!("must lie in (0, 1), got {}", self.s)));
        }
        if !(MIN_POINTS..=MAX_POINTS).contains(&self.n_points) {
            return Err(ConfigError::new(
                "N",
                format!("must lie in [{MIN_POINTS}, {MAX_POINTS}], got {}", self.n_points),
            ));
        }
        self.nonlinearity()?;
        let t = &self.tolerances;
        positive("tolerances.iteration", t.iteration)?;
        positive("tolerances.eigen", t.eigen)?;
        positive("tolerances.lambda_bracket", t.lambda_bracket)?;
        if let Some(cap) = t.sup_cap {
            if !(cap > 0.0) {
                return Err(ConfigError::new(
                    "tolerances.sup_cap",
                    format!("must be positive, got {cap}"),
                ));
            }
        }
        if t.max_iter == 0 {
            return Err(ConfigError::new("tolerances.max_iter", "must be at least 1"));
        }
        let b = &self.branch;
        if b.max_points == 0 {
            return Err(ConfigError::new("branch.max_points", "must be at least 1"));
        }
        positive("branch.lambda_step", b.lambda_step)?;
        if !(b.step_shrink > 0.0 && b.step_shrink < 1.0) {
            return Err(ConfigError::new(
                "branch.step_shrink",
                format!("must lie in (0, 1), got {}", b.step_shrink),
            ));
        }
        if let Some(&s) = self.critical.s_list.iter().find(|&&s| !(s > 0.0 && s <= 2.0)) {
            return Err(ConfigError::new(
                "critical.s_list",
                format!("entries must lie in (0, 2], got {s}"),
            ));
        }
        if let Some(&s) = self.gamma_table.s_list.iter().find(|&&s| !(s > 0.0 && s <= 2.0)) {
            return Err(ConfigError::new(
                "gamma_table.s_list",
                format!("entries must lie in (0, 2], got {s}"),
            ));
        }
        if self.critical.n_list.contains(&0) || self.gamma_table.n_list.contains(&0) {
            return Err(ConfigError::new("n_list", "dimensions must be at least 1"));
        }
        Ok(())
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, ConfigError> {
        Nonlinearity::by_name(&self.nonlinearity.name, self.nonlinearity.p)
            .map_err(|e| ConfigError::new("nonlinearity", e.to_string()))
    }

    pub fn iteration_options(&self, f: &Nonlinearity) -> IterationOptions {
        IterationOptions {
            sup_cap: self.tolerances.sup_cap.unwrap_or_else(|| f.default_sup_cap()),
            max_iter: self.tolerances.max_iter,
            tol: self.tolerances.iteration,
            ..IterationOptions::default()
        }
    }

    pub fn branch_options(&self, f: &Nonlinearity) -> BranchOptions {
        BranchOptions {
            lambda_step_init: self.branch.lambda_step,
            step_shrink: self.branch.step_shrink,
            stop_mu1: self.branch.stop_mu1,
            max_points: self.branch.max_points,
            iteration: self.iteration_options(f),
            ..BranchOptions::default()
        }
    }

    /// SHA-256 of the canonical JSON form, output locations excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Output directory: flag, then `FRACGELFAND_OUT_DIR`, then the file,
    /// then the working directory.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.to_path_buf();
        }
        if let Some(dir) = std::env::var_os("FRACGELFAND_OUT_DIR").filter(|d| !d.is_empty()) {
            return PathBuf::from(dir);
        }
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
