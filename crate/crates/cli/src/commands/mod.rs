pub mod assemble;
pub mod audit;
pub mod build;
pub mod evaluate;
pub mod generate;
pub mod summarize;

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use texttiger_core::promptgen::AssembledPrompt;
use texttiger_core::witcub::{load_dataset, Dataset};

use crate::config::RunConfig;

/// Bad invocation or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn required<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| UsageError(format!("missing {what}")).into())
}

pub struct Env {
    pub config: RunConfig,
    out_dir: Option<PathBuf>,
}

impl Env {
    pub fn new(config: RunConfig, out_dir: Option<PathBuf>) -> Self {
        Self { config, out_dir }
    }

    fn explicit_dir(&self) -> Option<PathBuf> {
        self.out_dir.clone().or_else(|| self.config.output_dir.clone())
    }

    /// Output directory: `--out-dir`, then the config, then `.`.
    pub fn dir(&self) -> PathBuf {
        self.explicit_dir().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Resolves a command's primary output file and the directory for its
    /// manifest. Without an explicit directory the file's parent is used.
    pub fn output(&self, out: Option<PathBuf>, default_name: &str) -> (PathBuf, PathBuf) {
        match (out, self.explicit_dir()) {
            (Some(out), Some(dir)) => (out, dir),
            (Some(out), None) => {
                let dir = out
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
                (out, dir)
            }
            (None, dir) => {
                let dir = dir.unwrap_or_else(|| PathBuf::from("."));
                (dir.join(default_name), dir)
            }
        }
    }

    pub fn dataset_path(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        required(flag.or_else(|| self.config.dataset_path.clone()), "dataset (--dataset or dataset_path)")
    }
}

/// An assembled prompt tagged with its instance id, one per JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    #[serde(flatten)]
    pub prompt: AssembledPrompt,
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut sink = create(path)?;
    for item in items {
        serde_json::to_writer(&mut sink, item)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut sink = create(path)?;
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_dataset(BufReader::new(file)).with_context(|| format!("loading dataset {}", path.display()))
}
