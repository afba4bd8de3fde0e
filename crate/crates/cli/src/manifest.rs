//! Provenance records written next to every command's outputs.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(Self { path: path.display().to_string(), sha256: sha256_file(path)? })
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub core_version: String,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_hash: String,
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Wall-clock time of the run; the only field that varies between
    /// otherwise identical invocations.
    pub created: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// serde_json maps are ordered by key, so `to_string` is canonical.
pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}

pub struct ManifestWriter {
    command: &'static str,
    config: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl ManifestWriter {
    pub fn new(command: &'static str, config: Value) -> Self {
        Self { command, config, inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) {
        self.inputs.push(path.into());
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        let path = path.into();
        if !self.outputs.contains(&path) {
            self.outputs.push(path);
        }
    }

    /// Writes `<dir>/<command>.manifest.json` and returns its path.
    pub fn write(self, dir: &Path) -> Result<PathBuf> {
        let digest_all = |paths: &[PathBuf]| paths.iter().map(|p| FileDigest::of(p)).collect::<Result<Vec<_>>>();
        let manifest = Manifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: texttiger_core::VERSION.to_string(),
            config_hash: config_hash(&self.config),
            config: self.config,
            inputs: digest_all(&self.inputs)?,
            outputs: digest_all(&self.outputs)?,
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
        let b = json!({"a": [1, 2], "b": 1});
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&json!({"a": [2, 1], "b": 1})));
    }

    #[test]
    fn known_digest() {
        let dir = std::env::temp_dir().join(format!("manifest-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let f = dir.join("abc.txt");
        fs::write(&f, "abc").unwrap();
        assert_eq!(sha256_file(&f).unwrap(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

        let mut w = ManifestWriter::new("audit", json!({"limit": 256}));
        w.output(&f);
        w.output(&f);
        let written: Value = serde_json::from_str(&fs::read_to_string(w.write(&dir).unwrap()).unwrap()).unwrap();
        assert_eq!(written["outputs"].as_array().unwrap().len(), 1);
        assert_eq!(written["command"], "audit");
        assert!(written["created"].as_str().unwrap().ends_with('Z'));
        fs::remove_dir_all(dir).unwrap();
    }
}
