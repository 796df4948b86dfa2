//! Deterministic report rendering: same manifest, same bytes.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use kstab::error::{KstabError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub output: String,
    pub seed: Option<u64>,
}

#[derive(Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub manifest: Manifest,
    #[serde(flatten)]
    pub payload: Value,
}

impl Report {
    pub fn new(command: &str, inputs: &[&PathBuf], out: &Path) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            manifest: Manifest {
                command: command.to_string(),
                inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
                output: out.display().to_string(),
                seed: None,
            },
            payload: Value::Object(serde_json::Map::new()),
        }
    }

    pub fn seed(mut self, seed: u64) -> Report {
        self.manifest.seed = Some(seed);
        self
    }

    pub fn payload(mut self, value: Value) -> Report {
        self.payload = value;
        self
    }

    /// Writes the pretty JSON to the output path and echoes it to stdout.
    pub fn write(&self, out: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| KstabError::InvalidInput(format!("serialization failed: {e}")))?;
        std::fs::write(out, format!("{text}\n"))
            .map_err(|e| KstabError::InvalidInput(format!("cannot write {}: {e}", out.display())))?;
        println!("{text}");
        Ok(())
    }
}
