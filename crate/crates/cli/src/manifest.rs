use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(FileDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

/// Record of one run, written next to its outputs. Contains no timestamps so
/// reruns on identical inputs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path) -> Result<Self> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    pub fn output(mut self, path: &Path) -> Result<Self> {
        self.outputs.push(FileDigest::of(path)?);
        Ok(self)
    }

    /// Writes `<artifact>.manifest.json`, or `manifest.json` inside a directory.
    pub fn write_beside(&self, artifact: &Path) -> Result<PathBuf> {
        let path = if artifact.is_dir() {
            artifact.join("manifest.json")
        } else {
            let mut name = artifact.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        };
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
