use crate::config::{CliError, ExperimentConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV table; rows are written in the given order.
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            file: file.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, T>(&mut self, row: I)
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        self.rows.push(row.into_iter().map(|v| v.to_string()).collect());
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Run(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Run(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Run(e.to_string()))
    }
}

/// Result document written as `<command>.json`.
#[derive(Serialize)]
pub struct Envelope<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub params: &'a serde_json::Value,
    pub verdict: &'a str,
    pub report: &'a serde_json::Value,
}

#[derive(Serialize)]
struct Artifact {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Timestamp {
    started_unix_s: f64,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    versions: Versions,
    config: &'a ExperimentConfig,
    verdict: &'a str,
    artifacts: Vec<Artifact>,
    /// Excluded from replay comparisons.
    timestamp: Timestamp,
}

#[derive(Serialize)]
struct Versions {
    latbs: &'static str,
    latbs_cli: &'static str,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_artifacts(
    dir: &Path,
    config: &ExperimentConfig,
    verdict: &str,
    files: Vec<(String, Vec<u8>)>,
    started: SystemTime,
    wall: Duration,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut artifacts = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        std::fs::write(dir.join(&name), &bytes)?;
        artifacts.push(Artifact {
            file: name,
            bytes: bytes.len(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        command: &config.command,
        versions: Versions {
            latbs: VERSION,
            latbs_cli: VERSION,
        },
        config,
        verdict,
        artifacts,
        timestamp: Timestamp {
            started_unix_s: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            wall_time_s: wall.as_secs_f64(),
        },
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Run(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}
