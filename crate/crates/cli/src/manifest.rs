use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Result;
use chrono::{SecondsFormat, Utc};
use serde::Serialize;

use crate::io::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Run record written next to a command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

/// Collects outputs while a command runs.
pub struct Recorder {
    out: PathBuf,
    command: String,
    config: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    started: String,
    outputs: Vec<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Recorder {
    pub fn new(out: &Path, command: &str, config: &impl Serialize) -> Result<Self> {
        std::fs::create_dir_all(out)?;
        Ok(Recorder {
            out: out.to_path_buf(),
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            started: now(),
            outputs: Vec::new(),
        })
    }

    /// Path for an output file, registered in the manifest.
    pub fn file(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn seed(&mut self, name: impl Into<String>, value: u64) {
        self.seeds.insert(name.into(), value);
    }

    pub fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            config: self.config,
            seeds: self.seeds,
            started: self.started,
            finished: now(),
            outputs: self.outputs,
        };
        write_json(&self.out.join(MANIFEST_FILE), &manifest)
    }
}
