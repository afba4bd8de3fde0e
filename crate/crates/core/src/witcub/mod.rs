//! Caption / image / entity-list datasets backed by Wikipedia abstracts.

mod build;
mod store;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::TokenCount;

pub use build::{build_dataset, BuildOptions, BuildOutcome, DroppedRow, HttpImageProbe, ImageProbe, WitRow};
pub use store::{load_dataset, save_dataset, FORMAT_NAME, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported dataset version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("stored stats {stored:?} disagree with recomputed {recomputed:?}")]
    StatsMismatch { stored: DatasetStats, recomputed: DatasetStats },
    #[error("no valid rows")]
    EmptyDataset,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A named entity with its Wikipedia abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityEntry {
    pub name: String,
    pub description: String,
    pub source_url: String,
}

impl EntityEntry {
    pub fn validate(&self) -> Result<(), String> {
        if self.name.trim().is_empty() {
            return Err("entity name is empty".into());
        }
        match url::Url::parse(&self.source_url) {
            Ok(u) if u.has_host() => Ok(()),
            _ => Err(format!("source_url {:?} is not an absolute URL", self.source_url)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitCubInstance {
    pub id: String,
    pub caption: String,
    pub image_ref: String,
    pub entities: Vec<EntityEntry>,
    pub caption_token_count: TokenCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub instance_count: usize,
    pub mean_entities_per_instance: f64,
    pub mean_caption_tokens: f64,
}

impl DatasetStats {
    pub fn compute(instances: &[WitCubInstance]) -> Self {
        let n = instances.len();
        let (entities, tokens) = instances
            .iter()
            .fold((0usize, 0usize), |(e, t), i| (e + i.entities.len(), t + i.caption_token_count.get()));
        let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
        Self { instance_count: n, mean_entities_per_instance: mean(entities), mean_caption_tokens: mean(tokens) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<WitCubInstance>,
    stats: DatasetStats,
}

impl Dataset {
    pub fn new(instances: Vec<WitCubInstance>) -> Self {
        let stats = DatasetStats::compute(&instances);
        Self { instances, stats }
    }

    pub fn instances(&self) -> &[WitCubInstance] {
        &self.instances
    }

    pub fn stats(&self) -> DatasetStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn into_instances(self) -> Vec<WitCubInstance> {
        self.instances
    }
}

/// Entities whose name occurs in `caption` as a whole phrase, compared
/// case-insensitively, in order of first occurrence and without repeats.
///
/// A trailing parenthetical disambiguator in the name ("Nore (river)") is
/// ignored when matching.
pub fn match_entities(caption: &str, entities: &[EntityEntry]) -> Vec<EntityEntry> {
    let haystack = caption.to_lowercase();
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (idx, entity) in entities.iter().enumerate() {
        let phrase = match_phrase(&entity.name).to_lowercase();
        if phrase.is_empty() {
            continue;
        }
        if let Some(pos) = find_whole_phrase(&haystack, &phrase) {
            hits.push((pos, idx));
        }
    }
    hits.sort();
    let mut seen = std::collections::HashSet::new();
    hits.into_iter()
        .filter(|&(_, idx)| seen.insert(entities[idx].name.to_lowercase()))
        .map(|(_, idx)| entities[idx].clone())
        .collect()
}

fn match_phrase(name: &str) -> &str {
    let trimmed = name.trim();
    match trimmed.strip_suffix(')').and_then(|s| s.rfind(" (").map(|i| &trimmed[..i])) {
        Some(base) if !base.trim().is_empty() => base.trim(),
        _ => trimmed,
    }
}

fn find_whole_phrase(haystack: &str, phrase: &str) -> Option<usize> {
    haystack.match_indices(phrase).map(|(pos, _)| pos).find(|&pos| {
        let before = haystack[..pos].chars().next_back();
        let after = haystack[pos + phrase.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}
