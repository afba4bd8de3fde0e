//! MediaWiki Action API client returning lead-section plain-text extracts.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use percent_encoding::percent_decode_str;
use serde::Deserialize;
use thiserror::Error;

use crate::http::{self, Attempt};
use crate::witcub::EntityEntry;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FetchError {
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("no article for {0:?}")]
    NotFound(String),
    #[error("article {0:?} has an empty extract")]
    EmptyDescription(String),
    #[error("cannot interpret {0:?} as a title or article URL")]
    InvalidReference(String),
    #[error("unexpected response: {0}")]
    Decode(String),
}

/// Something that resolves an article title or URL to an entity record.
pub trait EntitySource: Sync {
    fn fetch_entity(&self, title_or_url: &str) -> Result<EntityEntry, FetchError>;
}

#[derive(Debug, Clone)]
pub struct WikipediaConfig {
    /// Action API endpoint (`.../w/api.php`).
    pub endpoint: String,
    /// Prefix used to build canonical article URLs.
    pub article_base: String,
    pub user_agent: String,
    pub timeout: Duration,
    pub attempts: usize,
    pub backoff: Duration,
    /// Minimum gap between consecutive requests from this client.
    pub politeness_delay: Duration,
}

impl Default for WikipediaConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://en.wikipedia.org/w/api.php".into(),
            article_base: "https://en.wikipedia.org/wiki/".into(),
            user_agent: http::DEFAULT_USER_AGENT.into(),
            timeout: Duration::from_secs(30),
            attempts: 3,
            backoff: Duration::from_millis(500),
            politeness_delay: Duration::from_millis(100),
        }
    }
}

pub struct WikipediaClient {
    config: WikipediaConfig,
    http: reqwest::blocking::Client,
    last_request: Mutex<Option<Instant>>,
}

#[derive(Deserialize)]
struct QueryResponse {
    query: Option<QueryBody>,
    error: Option<ApiError>,
}

#[derive(Deserialize)]
struct ApiError {
    code: String,
    #[serde(default)]
    info: String,
}

#[derive(Deserialize)]
struct QueryBody {
    #[serde(default)]
    pages: Vec<Page>,
}

#[derive(Deserialize)]
struct Page {
    title: String,
    #[serde(default)]
    missing: bool,
    #[serde(default)]
    invalid: bool,
    #[serde(default)]
    extract: Option<String>,
}

impl WikipediaClient {
    pub fn new(config: WikipediaConfig) -> Self {
        let http = http::client(config.timeout, &config.user_agent);
        Self { config, http, last_request: Mutex::new(None) }
    }

    pub fn config(&self) -> &WikipediaConfig {
        &self.config
    }

    fn pace(&self) {
        if self.config.politeness_delay.is_zero() {
            return;
        }
        let mut last = self.last_request.lock().expect("pacing lock poisoned");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.config.politeness_delay {
                thread::sleep(self.config.politeness_delay - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn query_once(&self, title: &str) -> Attempt<Page, FetchError> {
        self.pace();
        let response = self
            .http
            .get(&self.config.endpoint)
            .query(&[
                ("action", "query"),
                ("format", "json"),
                ("formatversion", "2"),
                ("prop", "extracts"),
                ("exintro", "1"),
                ("explaintext", "1"),
                ("redirects", "1"),
                ("titles", title),
            ])
            .send();
        let response = match response {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Attempt::Retry(FetchError::Timeout),
            Err(e) => return Attempt::Retry(FetchError::Transport(e.to_string())),
        };
        let status = response.status().as_u16();
        if !response.status().is_success() {
            let err = FetchError::Status(status);
            return if http::transient_status(status) { Attempt::Retry(err) } else { Attempt::Fail(err) };
        }
        let body: QueryResponse = match response.json() {
            Ok(b) => b,
            Err(e) => return Attempt::Fail(FetchError::Decode(e.to_string())),
        };
        if let Some(err) = body.error {
            return Attempt::Fail(FetchError::Decode(format!("{}: {}", err.code, err.info)));
        }
        match body.query.and_then(|q| q.pages.into_iter().next()) {
            Some(page) if page.missing || page.invalid => Attempt::Fail(FetchError::NotFound(title.to_string())),
            Some(page) => Attempt::Done(page),
            None => Attempt::Fail(FetchError::NotFound(title.to_string())),
        }
    }

    fn article_url(&self, title: &str) -> Result<String, FetchError> {
        let base = url::Url::parse(&self.config.article_base)
            .map_err(|e| FetchError::InvalidReference(format!("{}: {e}", self.config.article_base)))?;
        base.join(&title.replace(' ', "_"))
            .map(|u| u.to_string())
            .map_err(|e| FetchError::InvalidReference(format!("{title}: {e}")))
    }
}

impl EntitySource for WikipediaClient {
    fn fetch_entity(&self, title_or_url: &str) -> Result<EntityEntry, FetchError> {
        let title = title_from_reference(title_or_url)?;
        let page = http::retry(self.config.attempts, self.config.backoff, |_| self.query_once(&title))?;
        let description = page.extract.unwrap_or_default().trim().to_string();
        if description.is_empty() {
            return Err(FetchError::EmptyDescription(page.title));
        }
        let source_url = self.article_url(&page.title)?;
        Ok(EntityEntry { name: page.title, description, source_url })
    }
}

/// Accepts a bare title or a `/wiki/<Title>` URL and returns the title
/// with underscores turned into spaces.
pub fn title_from_reference(reference: &str) -> Result<String, FetchError> {
    let reference = reference.trim();
    let raw = if reference.starts_with("http://") || reference.starts_with("https://") {
        let parsed = url::Url::parse(reference).map_err(|_| FetchError::InvalidReference(reference.to_string()))?;
        let path = parsed.path();
        match path.find("/wiki/") {
            Some(i) => path[i + "/wiki/".len()..].to_string(),
            None => parsed
                .query_pairs()
                .find(|(k, _)| k == "title")
                .map(|(_, v)| v.into_owned())
                .ok_or_else(|| FetchError::InvalidReference(reference.to_string()))?,
        }
    } else {
        reference.to_string()
    };
    let decoded = percent_decode_str(&raw).decode_utf8_lossy().replace('_', " ");
    let title = decoded.trim();
    if title.is_empty() {
        return Err(FetchError::InvalidReference(reference.to_string()));
    }
    Ok(title.to_string())
}
