//! Chat-completion client for OpenAI-compatible endpoints.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::http::{self, Attempt};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LlmError {
    #[error("LLM endpoint returned status {0}")]
    Status(u16),
    #[error("LLM request timed out")]
    Timeout,
    #[error("LLM transport error: {0}")]
    Transport(String),
    #[error("unexpected LLM response: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub max_output_tokens: u32,
    pub seed: u64,
    pub temperature: f64,
}

/// Anything that turns a chat request into completion text.
pub trait CompletionClient: Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError>;
}

/// Wire form of a request.
#[derive(Debug, Serialize)]
pub struct ChatBody<'a> {
    pub model: &'a str,
    pub messages: &'a [ChatMessage],
    pub max_tokens: u32,
    pub seed: u64,
    pub temperature: f64,
}

impl<'a> From<&'a CompletionRequest> for ChatBody<'a> {
    fn from(r: &'a CompletionRequest) -> Self {
        Self {
            model: &r.model,
            messages: &r.messages,
            max_tokens: r.max_output_tokens,
            seed: r.seed,
            temperature: r.temperature,
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ChatClientConfig {
    /// Base URL such as `http://localhost:8000/v1`; `/chat/completions` is appended.
    pub endpoint: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub retry_backoff: Duration,
}

impl ChatClientConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: None,
            timeout: Duration::from_secs(120),
            retry_backoff: Duration::from_millis(500),
        }
    }
}

pub struct ChatClient {
    url: String,
    config: ChatClientConfig,
    http: reqwest::blocking::Client,
}

impl ChatClient {
    pub fn new(config: ChatClientConfig) -> Self {
        let base = config.endpoint.trim_end_matches('/');
        let url =
            if base.ends_with("/chat/completions") { base.to_string() } else { format!("{base}/chat/completions") };
        let http = http::client(config.timeout, http::DEFAULT_USER_AGENT);
        Self { url, config, http }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn attempt(&self, request: &CompletionRequest) -> Attempt<String, LlmError> {
        let mut builder = self.http.post(&self.url).json(&ChatBody::from(request));
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = match builder.send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Attempt::Retry(LlmError::Timeout),
            Err(e) => return Attempt::Retry(LlmError::Transport(e.to_string())),
        };
        let status = response.status().as_u16();
        if !response.status().is_success() {
            let err = LlmError::Status(status);
            return if http::transient_status(status) { Attempt::Retry(err) } else { Attempt::Fail(err) };
        }
        let body: ChatResponse = match response.json() {
            Ok(b) => b,
            Err(e) if e.is_timeout() => return Attempt::Retry(LlmError::Timeout),
            Err(e) => return Attempt::Fail(LlmError::Decode(e.to_string())),
        };
        match body.choices.into_iter().next().and_then(|c| c.message.content) {
            Some(text) => Attempt::Done(text),
            None => Attempt::Fail(LlmError::Decode("response has no choices[0].message.content".into())),
        }
    }
}

impl CompletionClient for ChatClient {
    /// One retry on transient failures (timeouts, transport errors, 429, 5xx).
    fn complete(&self, request: &CompletionRequest) -> Result<String, LlmError> {
        http::retry(2, self.config.retry_backoff, |_| self.attempt(request))
    }
}

/// Sends one request through `client`.
pub fn llm_complete(request: &CompletionRequest, client: &dyn CompletionClient) -> Result<String, LlmError> {
    client.complete(request)
}
