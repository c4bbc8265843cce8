//! The run manifest: one record per stage with its config, config hash,
//! input and output digests and counts.
//!
//! A stage's config hash covers its own config and the config hashes of the
//! stages that produced its inputs, so two artifacts agree on their whole
//! upstream configuration exactly when their hashes match.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const RUN_MANIFEST: &str = "run-manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: Value,
    pub config_hash: String,
    /// Producing stage name to its config hash, or `external` inputs.
    pub upstream: BTreeMap<String, String>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub counts: BTreeMap<String, u64>,
    pub started_at: String,
    pub finished_at: String,
}

impl StageRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn input(&self, role: &str) -> Option<&FileRecord> {
        self.inputs.iter().find(|f| f.role == role)
    }

    pub fn output(&self, role: &str) -> Option<&FileRecord> {
        self.outputs.iter().find(|f| f.role == role)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stages: BTreeMap<String, StageRecord>,
}

impl RunManifest {
    pub fn load(out: &Path) -> Result<Self, CliError> {
        let path = out.join(RUN_MANIFEST);
        match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| {
                CliError::usage("run", format!("{}: {e}", path.display()))
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(CliError::stage("run", adscan::Error::io(path, e))),
        }
    }

    pub fn save(&self, out: &Path) -> Result<(), CliError> {
        let path = out.join(RUN_MANIFEST);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::stage("run", adscan::Error::io(path, e)))
    }

    pub fn ok_stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.get(name).filter(|r| r.ok())
    }

    /// Stage whose recorded output has this digest.
    pub fn producer_of(&self, sha256: &str) -> Option<(&str, &StageRecord)> {
        self.stages
            .iter()
            .filter(|(_, r)| r.ok())
            .find(|(_, r)| r.outputs.iter().any(|o| o.sha256 == sha256))
            .map(|(n, r)| (n.as_str(), r))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(stage: &str, config: &Value, upstream: &BTreeMap<String, String>) -> String {
    // serde_json maps are sorted by key, which makes this canonical.
    let v = serde_json::json!({"stage": stage, "config": config, "upstream": upstream});
    sha256_hex(serde_json::to_string(&v).expect("json serializes").as_bytes())
}

/// Inputs read and outputs written by one stage invocation.
#[derive(Debug)]
pub struct Ledger {
    pub stage: &'static str,
    pub out: PathBuf,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub counts: BTreeMap<String, u64>,
}

impl Ledger {
    pub fn new(stage: &'static str, out: &Path) -> Self {
        Self {
            stage,
            out: out.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn err(&self, e: adscan::Error) -> CliError {
        CliError::stage(self.stage, e)
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| self.err(adscan::Error::io(path, e)))?;
        self.inputs.push(FileRecord {
            role: role.into(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn read_text(&mut self, role: &str, path: &Path) -> Result<String, CliError> {
        let bytes = self.read(role, path)?;
        String::from_utf8(bytes)
            .map_err(|_| self.err(adscan::Error::Format(format!("{}: not UTF-8", path.display()))))
    }

    /// Writes `bytes` to `rel` under the run directory and records the output.
    pub fn write(&mut self, role: &str, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| self.err(adscan::Error::io(dir, e)))?;
        }
        std::fs::write(&path, bytes).map_err(|e| self.err(adscan::Error::io(&path, e)))?;
        self.outputs.push(FileRecord {
            role: role.into(),
            path: rel.into(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Records a file some other writer already put under the run directory.
    pub fn record_output(&mut self, role: &str, rel: &str, bytes: &[u8]) {
        self.outputs.push(FileRecord {
            role: role.into(),
            path: rel.into(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn count(&mut self, key: &str, n: usize) {
        self.counts.insert(key.into(), n as u64);
    }

    /// Upstream producers of every input, matched by digest. Inputs no
    /// stage produced are summarized per role as `external:<role>`.
    pub fn upstream(&self, run: &RunManifest) -> BTreeMap<String, String> {
        let mut up = BTreeMap::new();
        let mut external: BTreeMap<String, Sha256> = BTreeMap::new();
        for f in &self.inputs {
            match run.producer_of(&f.sha256) {
                Some((name, rec)) if name != self.stage => {
                    up.insert(name.to_string(), rec.config_hash.clone());
                }
                Some(_) => {}
                None => external
                    .entry(format!("external:{}", f.role))
                    .or_default()
                    .update(f.sha256.as_bytes()),
            }
        }
        up.extend(external.into_iter().map(|(k, h)| (k, hex::encode(h.finalize()))));
        up
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_key_order_independent() {
        let a: Value = serde_json::from_str(r#"{"tau":60,"distance":10.0}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"distance":10.0,"tau":60}"#).unwrap();
        let up = BTreeMap::new();
        assert_eq!(config_hash("dedup", &a, &up), config_hash("dedup", &b, &up));
        assert_ne!(config_hash("dedup", &a, &up), config_hash("rectify", &a, &up));
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
