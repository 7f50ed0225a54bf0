//! `manifest.json`: what ran, with which constants, and digests of every output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub experiment: String,
    pub seed: u64,
    pub workers: usize,
    /// Config lines as accepted, in file order.
    pub config: Vec<(String, String)>,
    pub started_at: String,
    pub finished_at: String,
    /// Constants echo per `alpha` value.
    pub constants: BTreeMap<String, String>,
    pub files: Vec<FileDigest>,
}

pub fn digest_file(dir: &Path, name: &str) -> SimResult<FileDigest> {
    let path = dir.join(name);
    let data = std::fs::read(&path).map_err(|e| SimError::io(&path, e))?;
    Ok(FileDigest { name: name.to_string(), bytes: data.len() as u64, sha256: hex::encode(Sha256::digest(&data)) })
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> SimResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| SimError::io(path, e))
    }

    pub fn read(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| SimError::io(path, std::io::Error::other(e)))
    }

    /// Names of files whose current digest differs from the recorded one.
    pub fn stale_files(&self, dir: &Path) -> SimResult<Vec<String>> {
        let mut out = Vec::new();
        for f in &self.files {
            if digest_file(dir, &f.name)? != *f {
                out.push(f.name.clone());
            }
        }
        Ok(out)
    }
}
