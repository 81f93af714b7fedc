//! Report files and the run manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nls_qi::report::McReport;

use crate::commands::Artifact;
use crate::config::ExperimentConfig;
use crate::schema::SCHEMA_VERSION;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV table with a fixed header.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { writer }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.writer.write_record(&cells).expect("writing to memory");
    }

    pub fn into_artifact(self, name: &str) -> nls_qi::Result<Artifact> {
        let bytes = self
            .writer
            .into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(Artifact {
            name: name.to_string(),
            bytes,
        })
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub subcommand: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub reports: Vec<McReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timings {
    pub parse_seconds: f64,
    pub run_seconds: f64,
    pub write_seconds: f64,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_path: String,
    pub config: ExperimentConfig,
    pub seed_override: Option<u64>,
    pub workers: usize,
    pub timings: Timings,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn report_artifact(subcommand: &str, cfg: &ExperimentConfig, reports: &[McReport]) -> nls_qi::Result<Artifact> {
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        subcommand: subcommand.to_string(),
        config: cfg.clone(),
        passed: reports.iter().all(|r| r.verdict == nls_qi::report::Verdict::Pass),
        reports: reports.to_vec(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(Artifact {
        name: "report.json".into(),
        bytes,
    })
}

/// Writes every artifact under `dir` and returns their digests in order.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<FileDigest>> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            std::fs::write(dir.join(&a.name), &a.bytes)?;
            Ok(FileDigest {
                name: a.name.clone(),
                bytes: a.bytes.len() as u64,
                sha256: sha256_hex(&a.bytes),
            })
        })
        .collect()
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    std::fs::write(dir.join("manifest.json"), bytes)
}
