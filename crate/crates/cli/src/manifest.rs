use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// Provenance record written next to every primary output as
/// `<output>.manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Effective configuration after defaults were applied.
    pub config: serde_json::Value,
    /// SHA-256 of the compact JSON of `config` (keys sorted).
    pub config_digest: String,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new<C: Serialize>(subcommand: &str, config: &C) -> anyhow::Result<Self> {
        let config = serde_json::to_value(config)?;
        let digest = lineshape::io::sha256_hex(&serde_json::to_vec(&config)?);
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config,
            config_digest: digest,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn path_for(primary: &Path) -> PathBuf {
        let mut name = primary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        primary.with_file_name(name)
    }

    /// Writes the manifest beside `primary` and returns its path.
    pub fn write_beside(&self, primary: &Path) -> anyhow::Result<PathBuf> {
        let path = Self::path_for(primary);
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)?;
        Ok(path)
    }
}
