//! Final image-generation prompts and the image backend contract.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::http;
use crate::refine::SummaryMethod;
use crate::tokenizer::{TokenBudget, TokenCount, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptMethod {
    CapOnly,
    CapAugOnly,
    TexttigerWoLen,
    Texttiger,
    IterativeTexttiger,
}

impl PromptMethod {
    pub const ALL: [PromptMethod; 5] = [
        PromptMethod::CapOnly,
        PromptMethod::CapAugOnly,
        PromptMethod::TexttigerWoLen,
        PromptMethod::Texttiger,
        PromptMethod::IterativeTexttiger,
    ];

    /// Summarization variant feeding this method, if any.
    pub fn summary_method(self) -> Option<SummaryMethod> {
        match self {
            PromptMethod::CapOnly | PromptMethod::CapAugOnly => None,
            PromptMethod::TexttigerWoLen => Some(SummaryMethod::WithoutLength),
            PromptMethod::Texttiger => Some(SummaryMethod::WithLength),
            PromptMethod::IterativeTexttiger => Some(SummaryMethod::Iterative),
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            PromptMethod::CapOnly => "cap-only",
            PromptMethod::CapAugOnly => "cap-aug-only",
            PromptMethod::TexttigerWoLen => "texttiger-wo-len",
            PromptMethod::Texttiger => "texttiger",
            PromptMethod::IterativeTexttiger => "iterative-texttiger",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            PromptMethod::CapOnly => "Cap-Only",
            PromptMethod::CapAugOnly => "Cap-Aug-Only",
            PromptMethod::TexttigerWoLen => "TextTIGER w/o Len",
            PromptMethod::Texttiger => "TextTIGER",
            PromptMethod::IterativeTexttiger => "Iterative-TextTIGER",
        }
    }
}

impl fmt::Display for PromptMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for PromptMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptMethod::ALL
            .into_iter()
            .find(|m| m.slug() == s)
            .ok_or_else(|| format!("unknown method {s:?}; expected one of cap-only, cap-aug-only, texttiger-wo-len, texttiger, iterative-texttiger"))
    }
}

/// Content of the "Note:" section.
#[derive(Debug, Clone, Copy)]
pub enum Note<'a> {
    Text(&'a str),
    /// Rendered as a bullet list, one `- {entity}: {description}` per line.
    Entities(&'a [(String, String)]),
}

impl Note<'_> {
    fn render(&self) -> String {
        match self {
            Note::Text(t) => t.trim().to_string(),
            Note::Entities(list) => list
                .iter()
                .map(|(name, desc)| format!("- {}: {}", name.trim(), desc.trim()))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembledPrompt {
    pub method: PromptMethod,
    pub text: String,
    pub token_count: TokenCount,
    pub truncated_at_t5: bool,
    pub truncated_at_clip: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("method {0} needs a description")]
    MissingDescription(PromptMethod),
    #[error("caption is empty")]
    EmptyCaption,
}

/// Builds `Caption: {caption}` optionally followed by a blank line and
/// `Note: {description}`. The caption is inserted verbatim.
pub fn assemble_prompt(
    method: PromptMethod,
    caption: &str,
    note: Option<Note<'_>>,
    vocab: &Vocabulary,
    budget: &TokenBudget,
) -> Result<AssembledPrompt, PromptError> {
    if caption.trim().is_empty() {
        return Err(PromptError::EmptyCaption);
    }
    let text = match method {
        PromptMethod::CapOnly => format!("Caption: {caption}"),
        _ => {
            let rendered = note.map(|n| n.render()).unwrap_or_default();
            if rendered.is_empty() {
                return Err(PromptError::MissingDescription(method));
            }
            format!("Caption: {caption}\n\nNote: {rendered}")
        }
    };
    let token_count = vocab.count_tokens(&text);
    Ok(AssembledPrompt {
        method,
        truncated_at_t5: token_count.get() > budget.t5_limit,
        truncated_at_clip: token_count.get() > budget.clip_limit,
        text,
        token_count,
    })
}

/// Parameters of one image-generation call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageGenRequest {
    pub prompt: String,
    pub seed: u64,
    pub guidance_scale: f64,
    #[serde(rename = "num_steps")]
    pub steps: u32,
    pub width: u32,
    pub height: u32,
    pub max_sequence_length: u32,
    pub model: String,
}

impl ImageGenRequest {
    /// Seed 42, guidance 3.5, 50 steps, 1024x1024, sequence length 512.
    pub fn new(prompt: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            seed: 42,
            guidance_scale: 3.5,
            steps: 50,
            width: 1024,
            height: 1024,
            max_sequence_length: 512,
            model: model.into(),
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.steps == 0 || self.width == 0 || self.height == 0 {
            return Err(GenError::InvalidRequest("steps, width and height must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedImageRef {
    /// Local file path or URL of the image.
    pub location: String,
    pub request: ImageGenRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("image backend returned status {0}")]
    Status(u16),
    #[error("image backend timed out")]
    Timeout,
    #[error("image backend unreachable: {0}")]
    Transport(String),
    #[error("unexpected backend response: {0}")]
    Decode(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("could not store image: {0}")]
    Io(String),
}

pub trait ImageBackend: Sync {
    /// `name` is the file stem used when the backend returns image bytes.
    fn generate(&self, request: &ImageGenRequest, name: &str) -> Result<GeneratedImageRef, GenError>;
}

/// JSON-over-HTTP backend: POSTs the request, expects `{"image": ...}`
/// holding base64 image bytes, a path, or a URL.
pub struct HttpImageBackend {
    url: String,
    out_dir: PathBuf,
    http: reqwest::blocking::Client,
}

impl HttpImageBackend {
    pub fn new(url: impl Into<String>, out_dir: impl Into<PathBuf>, timeout: Duration) -> Self {
        Self { url: url.into(), out_dir: out_dir.into(), http: http::client(timeout, http::DEFAULT_USER_AGENT) }
    }
}

#[derive(Deserialize)]
struct GenResponse {
    image: String,
}

impl ImageBackend for HttpImageBackend {
    fn generate(&self, request: &ImageGenRequest, name: &str) -> Result<GeneratedImageRef, GenError> {
        request.validate()?;
        let response = self.http.post(&self.url).json(request).send().map_err(|e| {
            if e.is_timeout() {
                GenError::Timeout
            } else {
                GenError::Transport(e.to_string())
            }
        })?;
        if !response.status().is_success() {
            return Err(GenError::Status(response.status().as_u16()));
        }
        let body: GenResponse = response.json().map_err(|e| GenError::Decode(e.to_string()))?;
        let location = store_image(&body.image, &self.out_dir, name)?;
        Ok(GeneratedImageRef { location, request: request.clone() })
    }
}

/// Calls the backend for one request.
pub fn generate_image(
    request: &ImageGenRequest,
    backend: &dyn ImageBackend,
    name: &str,
) -> Result<GeneratedImageRef, GenError> {
    backend.generate(request, name)
}

fn store_image(image: &str, out_dir: &Path, name: &str) -> Result<String, GenError> {
    let image = image.trim();
    if image.starts_with("http://") || image.starts_with("https://") {
        return Ok(image.to_string());
    }
    if let Ok(bytes) = base64::engine::general_purpose::STANDARD.decode(image) {
        if let Some(ext) = image_extension(&bytes) {
            std::fs::create_dir_all(out_dir).map_err(|e| GenError::Io(e.to_string()))?;
            let path = out_dir.join(format!("{name}.{ext}"));
            std::fs::write(&path, &bytes).map_err(|e| GenError::Io(e.to_string()))?;
            return Ok(path.to_string_lossy().into_owned());
        }
    }
    if image.is_empty() {
        return Err(GenError::Decode("empty image field".into()));
    }
    Ok(image.to_string())
}

fn image_extension(bytes: &[u8]) -> Option<&'static str> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        Some("png")
    } else if bytes.starts_with(&[0xff, 0xd8, 0xff]) {
        Some("jpg")
    } else if bytes.len() > 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WEBP" {
        Some("webp")
    } else {
        None
    }
}
