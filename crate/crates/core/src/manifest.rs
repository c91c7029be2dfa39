//! Provenance records written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub step: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputRecord>,
    pub tool: String,
}

impl OutputRecord {
    pub fn new(path: &Path, bytes: &[u8], step: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        OutputRecord {
            path: path.to_owned(),
            sha256: sha256_hex(bytes),
            step: step.to_owned(),
            parameters,
            seed,
            inputs: Vec::new(),
            tool: TOOL_VERSION.to_owned(),
        }
    }

    pub fn with_inputs(mut self, inputs: &[&Path]) -> Result<Self> {
        for p in inputs {
            self.inputs.push(InputRecord { path: p.to_path_buf(), sha256: sha256_file(p)? });
        }
        Ok(self)
    }
}

/// Sidecar path `<file>.manifest.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

/// Writes `bytes` to `path` and its manifest entry to the sidecar file.
pub fn write_output(path: &Path, bytes: &[u8], record: &OutputRecord) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_vec_pretty(record)?;
    fs::write(&side, json).map_err(|e| Error::io(&side, e))?;
    Ok(())
}
