use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Digest256 {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub engine_version: &'static str,
    pub command: &'static str,
    pub inputs: BTreeMap<String, Digest256>,
    pub scenario_name: Option<String>,
    pub scenario_hash: Option<String>,
    pub rng_seed: u64,
    /// Seconds since the epoch from `SOURCE_DATE_EPOCH`; null otherwise so
    /// repeated runs stay byte-identical.
    pub timestamp: Option<u64>,
    pub outputs: Vec<Digest256>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &'static str, rng_seed: u64) -> Self {
        RunManifest {
            engine_version: ubi_core::VERSION,
            command,
            inputs: BTreeMap::new(),
            scenario_name: None,
            scenario_hash: None,
            rng_seed,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, role: &str, path: &Path, bytes: &[u8]) {
        self.inputs.insert(
            role.to_string(),
            Digest256 {
                path: path.display().to_string(),
                sha256: sha256_hex(bytes),
            },
        );
    }

    pub fn add_output(&mut self, file: &str, bytes: &[u8]) {
        self.outputs.push(Digest256 {
            path: file.to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
