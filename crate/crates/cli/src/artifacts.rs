//! Result files and the run manifest.
//!
//! CSV schemas:
//! - `replications.csv`: `n,rep,seed,excess_risk,emp_risk,pop_risk,gap`
//! - `scaling_summary.csv`: `n,mean,quantile,quantile_delta_0_1,quantile_delta_0_01,prop1_bound`
//! - `gap_summary.csv`: `n,gap_mean,gap_quantile,eta_gap_quantile,emp_risk_mean,gamma,thm2_term,thm2_holds,gen_bound_term`
//! - `stability.csv`: `n,gamma_hat,theoretical_gamma,replications,probes,exact_probe_sup,worst_seed`
//! - `concentration.csv`: `t,empirical,std_error,bound,holds`

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummaryRow {
    pub n: usize,
    pub mean: f64,
    pub quantile: f64,
    pub quantile_delta_0_1: f64,
    pub quantile_delta_0_01: f64,
    pub prop1_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummaryRow {
    pub n: usize,
    pub gap_mean: f64,
    pub gap_quantile: f64,
    pub eta_gap_quantile: f64,
    pub emp_risk_mean: f64,
    pub gamma: f64,
    pub thm2_term: f64,
    pub thm2_holds: bool,
    pub gen_bound_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub n: usize,
    pub gamma_hat: f64,
    pub theoretical_gamma: f64,
    pub replications: usize,
    pub probes: usize,
    pub exact_probe_sup: bool,
    pub worst_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Identifies a run: the tool version, the hash of the output-determining
/// config fields, the base seed and the digest of every result file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub base_seed: u64,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects result files in memory and writes them with a manifest.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        text.push('\n');
        self.files.push((name.to_string(), text.into_bytes()));
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    /// Writes every file and the manifest under `dir`.
    pub fn write(mut self, dir: &Path, config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        self.files.sort_by(|a, b| a.0.cmp(&b.0));
        let experiment = serde_json::to_value(config.experiment)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let manifest = Manifest {
            tool: "scolab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            experiment,
            base_seed: config.base_seed,
            config_sha256: sha256_hex(config.canonical_json().as_bytes()),
            files: self
                .files
                .iter()
                .map(|(name, bytes)| FileEntry {
                    name: name.clone(),
                    sha256: sha256_hex(bytes),
                    bytes: bytes.len(),
                })
                .collect(),
        };
        self.json(MANIFEST, &manifest)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn csv_round_trips() {
        let rows = vec![
            StabilityRow {
                n: 4,
                gamma_hat: 0.5,
                theoretical_gamma: 1.0 / 3.0,
                replications: 10,
                probes: 2,
                exact_probe_sup: true,
                worst_seed: u64::MAX,
            },
            StabilityRow {
                n: 8,
                gamma_hat: 1e-300,
                theoretical_gamma: 2.0,
                replications: 10,
                probes: 2,
                exact_probe_sup: false,
                worst_seed: 0,
            },
        ];
        let mut a = Artifacts::new();
        a.csv("s.csv", rows.clone()).unwrap();
        let back: Vec<StabilityRow> = csv::Reader::from_reader(a.files[0].1.as_slice())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back, rows);
    }
}
