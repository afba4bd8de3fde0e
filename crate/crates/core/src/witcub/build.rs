use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, WitCubInstance};
use crate::http;
use crate::tokenizer::Vocabulary;
use crate::wikipedia::{EntitySource, FetchError};
use crate::witcub::EntityEntry;

/// One candidate row: a caption, its image and the entity article URLs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitRow {
    #[serde(default)]
    pub id: Option<String>,
    pub caption: String,
    #[serde(alias = "image_url")]
    pub image_ref: String,
    #[serde(default)]
    pub entity_urls: Vec<String>,
}

/// Checks whether an image reference is still reachable.
pub trait ImageProbe: Sync {
    fn check(&self, image_ref: &str) -> Result<(), String>;
}

/// HEAD request (falling back to GET) for URLs; existence check for paths.
pub struct HttpImageProbe {
    http: reqwest::blocking::Client,
}

impl HttpImageProbe {
    pub fn new(timeout: Duration) -> Self {
        Self { http: http::client(timeout, http::DEFAULT_USER_AGENT) }
    }
}

impl Default for HttpImageProbe {
    fn default() -> Self {
        Self::new(Duration::from_secs(20))
    }
}

impl ImageProbe for HttpImageProbe {
    fn check(&self, image_ref: &str) -> Result<(), String> {
        if !(image_ref.starts_with("http://") || image_ref.starts_with("https://")) {
            return if Path::new(image_ref).is_file() {
                Ok(())
            } else {
                Err(format!("image file {image_ref:?} does not exist"))
            };
        }
        let head = self.http.head(image_ref).send();
        match head {
            Ok(r) if r.status().is_success() => return Ok(()),
            Ok(r) if !matches!(r.status().as_u16(), 403 | 405 | 501) => {
                return Err(format!("image HEAD returned {}", r.status().as_u16()))
            }
            _ => {}
        }
        match self.http.get(image_ref).send() {
            Ok(r) if r.status().is_success() => Ok(()),
            Ok(r) => Err(format!("image GET returned {}", r.status().as_u16())),
            Err(e) => Err(format!("image request failed: {e}")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Number of rows processed concurrently.
    pub parallel: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { parallel: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedRow {
    pub id: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub dataset: Dataset,
    pub dropped: Vec<DroppedRow>,
}

/// Keeps rows whose image responds and whose every entity resolves.
///
/// Output order follows input order regardless of completion order. Rows
/// without an `id` get their 1-based input position, zero-padded.
pub fn build_dataset<I>(
    rows: I,
    source: &dyn EntitySource,
    probe: &dyn ImageProbe,
    vocab: &Vocabulary,
    options: BuildOptions,
) -> Result<BuildOutcome, DatasetError>
where
    I: IntoIterator<Item = WitRow>,
{
    let rows: Vec<WitRow> = rows.into_iter().collect();
    let cache: Mutex<HashMap<String, Result<EntityEntry, FetchError>>> = Mutex::new(HashMap::new());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<WitCubInstance, DroppedRow>)>> = Mutex::new(Vec::with_capacity(rows.len()));

    let workers = options.parallel.clamp(1, rows.len().max(1));
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                let Some(row) = rows.get(idx) else { break };
                let outcome = process_row(idx, row, source, probe, vocab, &cache);
                results.lock().expect("results lock poisoned").push((idx, outcome));
            });
        }
    });

    let mut results = results.into_inner().expect("results lock poisoned");
    results.sort_by_key(|(idx, _)| *idx);
    let mut instances = Vec::new();
    let mut dropped = Vec::new();
    for (_, outcome) in results {
        match outcome {
            Ok(instance) => instances.push(instance),
            Err(d) => {
                log::warn!("dropping row {}: {}", d.id, d.reason);
                dropped.push(d);
            }
        }
    }
    if instances.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    Ok(BuildOutcome { dataset: Dataset::new(instances), dropped })
}

fn process_row(
    idx: usize,
    row: &WitRow,
    source: &dyn EntitySource,
    probe: &dyn ImageProbe,
    vocab: &Vocabulary,
    cache: &Mutex<HashMap<String, Result<EntityEntry, FetchError>>>,
) -> Result<WitCubInstance, DroppedRow> {
    let id = row.id.clone().unwrap_or_else(|| format!("{:06}", idx + 1));
    let drop = |reason: String| DroppedRow { id: id.clone(), reason };

    let caption = row.caption.trim();
    if caption.is_empty() {
        return Err(drop("empty caption".into()));
    }
    probe.check(&row.image_ref).map_err(drop)?;

    let mut seen = std::collections::HashSet::new();
    let mut entities = Vec::new();
    for url in &row.entity_urls {
        let url = url.trim();
        if url.is_empty() || !seen.insert(url.to_string()) {
            continue;
        }
        let cached = cache.lock().expect("cache lock poisoned").get(url).cloned();
        let fetched = match cached {
            Some(r) => r,
            None => {
                let r = source.fetch_entity(url);
                cache.lock().expect("cache lock poisoned").insert(url.to_string(), r.clone());
                r
            }
        };
        let entity = fetched.map_err(|e| drop(format!("entity {url}: {e}")))?;
        // Two URLs may redirect to the same article.
        if !entities.iter().any(|e: &EntityEntry| e.source_url == entity.source_url) {
            entities.push(entity);
        }
    }

    Ok(WitCubInstance {
        id: id.clone(),
        caption: caption.to_string(),
        image_ref: row.image_ref.clone(),
        entities,
        caption_token_count: vocab.count_tokens(caption),
    })
}
