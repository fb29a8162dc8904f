use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Written into the run directory before any result file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: RunConfig,
    pub seeds: BTreeMap<String, u64>,
    pub version: String,
    pub timestamps: Timestamps,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix_s: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, seeds: &[(&str, u64)], outputs: &[&str]) -> Self {
        let started_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config: config.clone(),
            seeds: seeds.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamps: Timestamps { started_unix_s },
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        edge_auction::io::write_json(&dir.join(MANIFEST_FILE), self)
            .with_context(|| format!("cannot write manifest in {}", dir.display()))
    }
}
