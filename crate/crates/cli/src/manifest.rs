//! Run manifests: a digest inventory of everything a command read and wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Digest of the config file, when one was used.
    pub config_sha256: Option<String>,
    pub created_unix_s: u64,
    /// Relative output path -> sha256. Deterministic commands reproduce
    /// identical digests on identical configs.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Compute(format!("cannot hash {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub struct ManifestBuilder {
    out_dir: PathBuf,
    command: String,
    config_sha256: Option<String>,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn new(out_dir: &Path, command: &str) -> Self {
        ManifestBuilder {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            config_sha256: None,
            outputs: Vec::new(),
        }
    }

    pub fn with_config(mut self, config_path: Option<&Path>) -> Result<Self, CliError> {
        if let Some(p) = config_path {
            let bytes = std::fs::read(p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            self.config_sha256 = Some(hex::encode(Sha256::digest(&bytes)));
        }
        Ok(self)
    }

    /// Register a file just written under the output directory.
    pub fn add(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(self) -> Result<(), CliError> {
        let mut outputs = BTreeMap::new();
        for p in &self.outputs {
            let rel = p
                .strip_prefix(&self.out_dir)
                .unwrap_or(p)
                .to_string_lossy()
                .into_owned();
            outputs.insert(rel, sha256_file(p)?);
        }
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            config_sha256: self.config_sha256,
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs,
        };
        let path = self.out_dir.join("manifest.json");
        crate::report::write_json(&path, &manifest)
    }
}
