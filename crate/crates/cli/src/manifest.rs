//! Reproducibility record written next to every run's outputs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qpar::rng::DrawRecord;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Random draws consumed for one purpose.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawEntry {
    pub purpose: String,
    pub seed: u64,
    pub substream: u64,
    pub count: u64,
}

impl DrawEntry {
    pub fn new(purpose: impl Into<String>, record: &DrawRecord) -> Self {
        DrawEntry {
            purpose: purpose.into(),
            seed: record.seed,
            substream: record.substream,
            count: record.count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub kind: String,
    pub path: String,
    pub sha256: String,
}

/// Per-trace numerical diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDiagnostics {
    pub column: String,
    pub label: String,
    pub propagator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_dt: Option<f64>,
    pub trotter_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_magnetization_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_samples: Option<u64>,
}

/// Pure-versus-ensemble comparison, compare mode only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub rms_deviation: f64,
    pub max_abs_deviation: f64,
    /// Residual `(P_pure - P_ens)/2` in up-probability units.
    pub residual_rms: f64,
    pub residual_max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Fully resolved configuration; re-validating it is a no-op.
    pub config: RunConfig,
    pub draws: Vec<DrawEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
    pub traces: Vec<TraceDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<CompareSummary>,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config("manifest", e.to_string()))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn checksum(&self, kind: &str) -> Option<&str> {
        self.outputs
            .iter()
            .find(|o| o.kind == kind)
            .map(|o| o.sha256.as_str())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}
