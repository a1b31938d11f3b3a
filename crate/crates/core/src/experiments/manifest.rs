use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ScenarioConfig;
use crate::error::Result;

pub const MANIFEST_SCHEMA: &str = "nls-threshold/manifest-v1";

/// One produced file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub module: String,
    pub description: String,
}

/// One asserted quantity with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub module: String,
    pub value: f64,
    /// `value <= bound` or `value >= bound`, per `comparison`.
    pub bound: f64,
    pub comparison: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, module: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            module: module.into(),
            value,
            bound,
            comparison: "<=".into(),
            passed: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, module: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            module: module.into(),
            value,
            bound,
            comparison: ">=".into(),
            passed: value >= bound,
        }
    }

    /// A boolean condition recorded as `value = 1` (true) or `0`.
    pub fn holds(name: impl Into<String>, module: &str, ok: bool) -> Self {
        Check {
            name: name.into(),
            module: module.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            comparison: "==".into(),
            passed: ok,
        }
    }
}

/// Record of one run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub crate_version: String,
    pub scenario: String,
    pub config_hash: String,
    pub run_dir: PathBuf,
    /// Fully resolved config, defaults included.
    pub config: ScenarioConfig,
    pub outputs: Vec<OutputEntry>,
    pub checks: Vec<Check>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?)
    }
}

/// First 16 hex digits of the SHA-256 of the resolved config.
pub fn config_hash(config: &ScenarioConfig) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    let digest = Sha256::digest(&bytes);
    Ok(hex::encode(digest)[..16].to_string())
}
