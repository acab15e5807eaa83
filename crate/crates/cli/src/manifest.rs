//! Run manifests: what was run, with which resolved settings, producing
//! which files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliResult;
use crate::output::{sha256_hex, sibling, write_atomic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub software_version: String,
    /// Resolved settings in SI units.
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, seed: Option<u64>) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            command: command.to_string(),
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    /// Writes `bytes` atomically and records the file's digest.
    pub fn emit(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        write_atomic(path, bytes)?;
        self.outputs.push(FileDigest::of(path, bytes));
        Ok(())
    }

    /// Stores the manifest beside `primary` as `<primary>.manifest.json`.
    pub fn finish(mut self, primary: &Path, started: std::time::Instant) -> CliResult<()> {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n";
        write_atomic(&sibling(primary, ".manifest.json"), text.as_bytes())
    }
}
