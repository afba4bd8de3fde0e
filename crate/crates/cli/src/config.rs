//! Declarative run configuration. Command-line flags (and their environment
//! variables) take precedence over values read from the JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use texttiger_core::promptgen::PromptMethod;
use texttiger_core::tokenizer::TokenBudget;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset_path: Option<PathBuf>,
    pub methods: Option<Vec<PromptMethod>>,
    #[serde(default)]
    pub summarizer: SummarizerConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    pub budget: Option<TokenBudget>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub feature_paths: FeaturePaths,
    pub wiki_url: Option<String>,
    pub parallel: Option<usize>,
    pub splits: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummarizerConfig {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub temperature: Option<f64>,
    pub max_output_tokens: Option<u32>,
    pub max_iterations: Option<usize>,
    pub system_prompt: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub url: Option<String>,
    pub model: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturePaths {
    pub label_dist: Option<PathBuf>,
    pub real_features: Option<PathBuf>,
    pub gen_features: Option<PathBuf>,
    pub clip_img: Option<PathBuf>,
    pub clip_txt: Option<PathBuf>,
    pub clip_real_img: Option<PathBuf>,
}

impl FeaturePaths {
    fn all(&self) -> impl Iterator<Item = &PathBuf> {
        [&self.label_dist, &self.real_features, &self.gen_features, &self.clip_img, &self.clip_txt, &self.clip_real_img]
            .into_iter()
            .flatten()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(&self.methods, Some(m) if m.is_empty()) {
            bail!("config: methods must not be empty");
        }
        for path in self.dataset_path.iter().chain(self.feature_paths.all()) {
            if !path.exists() {
                bail!("config: {} does not exist", path.display());
            }
        }
        if let Some(b) = &self.budget {
            b.validate().map_err(|e| anyhow::anyhow!("config: {e}"))?;
        }
        if self.parallel == Some(0) || self.splits == Some(0) {
            bail!("config: parallel and splits must be positive");
        }
        Ok(())
    }

    pub fn budget(&self) -> TokenBudget {
        self.budget.unwrap_or_default()
    }
}

/// First of flag, config value, default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

/// Methods from the flag, else from the config; errors when neither names any.
pub fn methods(flag: Option<PromptMethod>, config: &RunConfig) -> Result<Vec<PromptMethod>> {
    match (flag, &config.methods) {
        (Some(m), _) => Ok(vec![m]),
        (None, Some(list)) => Ok(list.clone()),
        (None, None) => bail!("no method given: pass --method or list methods in the config"),
    }
}
