//! Entity augmentation and budget-constrained summarization.
//!
//! Augmentation gathers the descriptions of entities mentioned in a caption.
//! Summarization asks an LLM to compress them, optionally telling it the
//! current CLIP token count, and (for the iterative variant) re-asks with the
//! previous summary until it fits the budget or the round limit is reached.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ChatMessage, CompletionClient, CompletionRequest, LlmError};
use crate::tokenizer::{TokenBudget, TokenCount, Vocabulary};
use crate::witcub::{match_entities, WitCubInstance};

pub const SUMMARY_START: &str = "SummaryStart:";
pub const SUMMARY_END: &str = "<SummaryEnd>";

/// Separator placed between entity descriptions.
pub const DESCRIPTION_SEPARATOR: &str = "\n\n";

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("{0:?} prompt needs the current token count")]
    MissingTokenCount(SummaryMethod),
    #[error("nothing to summarize")]
    EmptyDescription,
    #[error("no {SUMMARY_END} marker in model output")]
    MalformedSummary { output: String },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("no usable summary after {} round(s)", raw_outputs.len())]
    Summary { raw_outputs: Vec<String> },
    #[error("invalid summarizer configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedDescription {
    pub per_entity: Vec<(String, String)>,
    pub joined_text: String,
}

impl AugmentedDescription {
    pub fn from_entities(per_entity: Vec<(String, String)>) -> Self {
        let joined_text = per_entity.iter().map(|(_, d)| d.trim()).collect::<Vec<_>>().join(DESCRIPTION_SEPARATOR);
        Self { per_entity, joined_text }
    }

    pub fn is_empty(&self) -> bool {
        self.per_entity.is_empty()
    }
}

/// Descriptions of the instance's entities that the caption mentions, in
/// caption order.
pub fn build_augmentation(instance: &WitCubInstance) -> AugmentedDescription {
    let matched = match_entities(&instance.caption, &instance.entities);
    AugmentedDescription::from_entities(matched.into_iter().map(|e| (e.name, e.description)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummaryMethod {
    /// No token count in the prompt.
    WithoutLength,
    /// Current token count stated once.
    WithLength,
    /// Re-asks with the previous summary while it is over budget.
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmParams {
    pub model_name: String,
    pub seed: u64,
    pub max_output_tokens: u32,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_prompt: Option<String>,
}

impl LlmParams {
    /// 512 output tokens without a length hint, 180 otherwise; seed 0;
    /// temperature 0.
    pub fn for_method(method: SummaryMethod, model_name: impl Into<String>) -> Self {
        let max_output_tokens = match method {
            SummaryMethod::WithoutLength => 512,
            SummaryMethod::WithLength | SummaryMethod::Iterative => 180,
        };
        Self { model_name: model_name.into(), seed: 0, max_output_tokens, temperature: 0.0, system_prompt: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarizeConfig {
    pub method: SummaryMethod,
    pub budget: TokenBudget,
    pub max_iterations: usize,
    pub llm: LlmParams,
}

impl SummarizeConfig {
    pub fn new(method: SummaryMethod, model_name: impl Into<String>) -> Self {
        Self {
            method,
            budget: TokenBudget::default(),
            max_iterations: 3,
            llm: LlmParams::for_method(method, model_name),
        }
    }

    pub fn validate(&self) -> Result<(), RefineError> {
        if self.max_iterations == 0 {
            return Err(RefineError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.llm.max_output_tokens == 0 {
            return Err(RefineError::InvalidConfig("max_output_tokens must be positive".into()));
        }
        self.budget.validate().map_err(|e| RefineError::InvalidConfig(e.to_string()))
    }

    fn rounds(&self) -> usize {
        match self.method {
            SummaryMethod::Iterative => self.max_iterations,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryResult {
    pub text: String,
    pub token_count: TokenCount,
    pub iterations_used: usize,
    pub compliant: bool,
    pub raw_outputs: Vec<String>,
}

const INSTRUCTIONS: &str = "\
Please generate a summary so that there are {target} tokens.
However, please do not delete proper nouns or other important information.
Please begin the output with SummaryStart: and write the summary of the text.
Please end the output with <SummaryEnd> as the last token.
";

const EXAMPLE_SUMMARY: &str =
    "SummaryStart: The summary of the text is as follows. The text is about the summary of the text. <SummaryEnd>";
const EXAMPLE_PROMPT: &str =
    "SummaryStart: The summary of the text is as follows. The text is about the prompt of the text. <SummaryEnd>";

/// Renders the summarization prompt with the default 180-token target.
pub fn render_summary_prompt(
    method: SummaryMethod,
    description: &str,
    current_tokens: Option<TokenCount>,
) -> Result<String, RefineError> {
    render_summary_prompt_with_target(method, description, current_tokens, TokenBudget::default().summary_budget)
}

pub fn render_summary_prompt_with_target(
    method: SummaryMethod,
    description: &str,
    current_tokens: Option<TokenCount>,
    target: usize,
) -> Result<String, RefineError> {
    if description.trim().is_empty() {
        return Err(RefineError::EmptyDescription);
    }
    let count_line = match (method, current_tokens) {
        (SummaryMethod::WithoutLength, _) => None,
        (SummaryMethod::WithLength, Some(n)) => Some(format!("The current tokens are {n} tokens.\n")),
        (SummaryMethod::Iterative, Some(n)) => Some(format!("The current tokens are still {n} tokens.\n")),
        (m, None) => return Err(RefineError::MissingTokenCount(m)),
    };
    let example = match method {
        SummaryMethod::WithoutLength => EXAMPLE_SUMMARY,
        _ => EXAMPLE_PROMPT,
    };
    let mut prompt = String::with_capacity(description.len() + 640);
    if let Some(line) = count_line {
        prompt.push_str(&line);
    }
    prompt.push_str(&INSTRUCTIONS.replace("{target}", &target.to_string()));
    prompt.push_str("\nExample:\n");
    prompt.push_str(example);
    prompt.push_str("\n\nComplement:\n");
    prompt.push_str(description);
    prompt.push_str("\n\n");
    prompt.push_str(SUMMARY_START);
    Ok(prompt)
}

/// Text between the first start marker and the first end marker after it.
///
/// The prompt ends with the start marker, so a completion that continues
/// straight into the summary (no marker of its own) starts at offset 0.
pub fn extract_summary(llm_output: &str) -> Result<String, RefineError> {
    let malformed = || RefineError::MalformedSummary { output: llm_output.to_string() };
    let first_end = llm_output.find(SUMMARY_END).ok_or_else(malformed)?;
    let start = match llm_output.find(SUMMARY_START) {
        Some(pos) if pos < first_end => pos + SUMMARY_START.len(),
        _ => 0,
    };
    let summary = llm_output[start..first_end].trim();
    if summary.is_empty() {
        return Err(malformed());
    }
    Ok(summary.to_string())
}

/// Runs the configured summarization method over one description.
pub fn summarize(
    description: &str,
    config: &SummarizeConfig,
    llm: &dyn CompletionClient,
    vocab: &Vocabulary,
) -> Result<SummaryResult, RefineError> {
    config.validate()?;
    if description.trim().is_empty() {
        return Err(RefineError::EmptyDescription);
    }
    let budget = config.budget.summary_budget;
    let mut source = description.to_string();
    let mut source_tokens = vocab.count_tokens(&source);
    let mut raw_outputs = Vec::new();
    let mut best: Option<(String, TokenCount)> = None;

    for round in 0..config.rounds() {
        // The first iterative round is a plain length-aware request.
        let method = match (config.method, round) {
            (SummaryMethod::Iterative, 0) => SummaryMethod::WithLength,
            (m, _) => m,
        };
        let prompt = render_summary_prompt_with_target(method, &source, Some(source_tokens), budget)?;
        let mut messages = Vec::with_capacity(2);
        if let Some(system) = &config.llm.system_prompt {
            messages.push(ChatMessage::system(system.clone()));
        }
        messages.push(ChatMessage::user(prompt));
        let request = CompletionRequest {
            model: config.llm.model_name.clone(),
            messages,
            max_output_tokens: config.llm.max_output_tokens,
            seed: config.llm.seed,
            temperature: config.llm.temperature,
        };
        let output = llm.complete(&request)?;
        raw_outputs.push(output);

        match extract_summary(raw_outputs.last().expect("just pushed")) {
            Ok(text) => {
                let count = vocab.count_tokens(&text);
                let fits = count.get() <= budget;
                source = text.clone();
                source_tokens = count;
                best = Some((text, count));
                if fits {
                    break;
                }
            }
            Err(RefineError::MalformedSummary { .. }) => {
                log::debug!("round {} produced no end marker", round + 1);
            }
            Err(e) => return Err(e),
        }
    }

    match best {
        Some((text, token_count)) => Ok(SummaryResult {
            compliant: token_count.get() <= budget,
            text,
            token_count,
            iterations_used: raw_outputs.len(),
            raw_outputs,
        }),
        None => Err(RefineError::Summary { raw_outputs }),
    }
}

/// Summarizes many descriptions with at most `parallel` requests in flight.
/// Results come back in input order.
pub fn summarize_batch<'a>(
    items: &'a [(String, String)],
    config: &SummarizeConfig,
    llm: &dyn CompletionClient,
    vocab: &Vocabulary,
    parallel: usize,
) -> Vec<(&'a str, Result<SummaryResult, RefineError>)> {
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::with_capacity(items.len()));
    thread::scope(|scope| {
        for _ in 0..parallel.clamp(1, items.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                let Some((id, description)) = items.get(idx) else { break };
                let result = summarize(description, config, llm, vocab);
                out.lock().expect("batch lock poisoned").push((idx, id.as_str(), result));
            });
        }
    });
    let mut out = out.into_inner().expect("batch lock poisoned");
    out.sort_by_key(|(idx, ..)| *idx);
    out.into_iter().map(|(_, id, r)| (id, r)).collect()
}
