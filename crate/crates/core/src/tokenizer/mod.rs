//! CLIP-compatible byte-level BPE tokenizer used for all length budgeting.
//!
//! Counts exclude the begin/end special tokens and are never truncated, so
//! callers can audit prompts that run past an encoder's window.

mod normalize;
mod vocab;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use normalize::clean;
pub use vocab::{ByteMap, Vocabulary, END_OF_TEXT, END_OF_WORD, START_OF_TEXT};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenizerError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate token string {0:?}")]
    DuplicateToken(String),
    #[error("id {id} assigned to both {first:?} and {second:?}")]
    DuplicateId { id: u32, first: String, second: String },
    #[error("vocabulary lacks base byte token {0:?}")]
    MissingBaseToken(String),
}

/// Number of content tokens in a text (special tokens excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenCount(usize);

impl TokenCount {
    pub const fn new(content_tokens: usize) -> Self {
        Self(content_tokens)
    }

    pub const fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for TokenCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Token limits that drive every length decision in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBudget {
    /// CLIP text-encoder window.
    pub clip_limit: usize,
    /// T5 text-encoder window.
    pub t5_limit: usize,
    /// Target length for a summarized description.
    pub summary_budget: usize,
}

impl Default for TokenBudget {
    fn default() -> Self {
        Self { clip_limit: 77, t5_limit: 256, summary_budget: 180 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid token budget: {0}")]
pub struct BudgetError(pub &'static str);

impl TokenBudget {
    pub fn validate(&self) -> Result<(), BudgetError> {
        if self.clip_limit == 0 || self.t5_limit == 0 || self.summary_budget == 0 {
            return Err(BudgetError("all limits must be positive"));
        }
        if self.summary_budget >= self.t5_limit {
            return Err(BudgetError("summary budget must be below the T5 limit"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetStatus {
    Within,
    ExceededBy(usize),
}

/// Compares a count against a limit; the limit itself is within budget.
pub fn check_budget(count: TokenCount, limit: usize) -> BudgetStatus {
    assert!(limit > 0, "token limit must be positive");
    match count.get().checked_sub(limit) {
        Some(0) | None => BudgetStatus::Within,
        Some(over) => BudgetStatus::ExceededBy(over),
    }
}

impl Vocabulary {
    /// Encodes text to token ids, without begin/end tokens.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let cleaned = clean(text);
        let mut ids = Vec::with_capacity(cleaned.len() / 3 + 1);
        let mut symbols = Vec::new();
        for m in self.pattern.find_iter(&cleaned) {
            let piece = m.as_str();
            if let Some(id) = self.special_id(piece) {
                ids.push(id);
                continue;
            }
            self.bpe_into(piece.as_bytes(), &mut symbols);
            ids.extend_from_slice(&symbols);
        }
        ids
    }

    pub fn count_tokens(&self, text: &str) -> TokenCount {
        TokenCount(self.encode(text).len())
    }

    /// Applies ranked merges to one pre-token. The final byte carries the
    /// end-of-word marker.
    fn bpe_into(&self, bytes: &[u8], word: &mut Vec<u32>) {
        word.clear();
        let Some((&last, head)) = bytes.split_last() else {
            return;
        };
        word.extend(head.iter().map(|&b| self.byte_ids[b as usize]));
        word.push(self.byte_end_ids[last as usize]);

        while word.len() > 1 {
            let best = word
                .windows(2)
                .filter_map(|w| self.merge_ids.get(&(w[0], w[1])).map(|t| (t.rank, w[0], w[1], t.merged)))
                .min_by_key(|&(rank, ..)| rank);
            let Some((_, first, second, merged)) = best else {
                break;
            };
            let mut i = 0;
            let mut out = 0;
            while i < word.len() {
                if i + 1 < word.len() && word[i] == first && word[i + 1] == second {
                    word[out] = merged;
                    i += 2;
                } else {
                    word[out] = word[i];
                    i += 1;
                }
                out += 1;
            }
            word.truncate(out);
        }
    }
}

/// Free-function form of [`Vocabulary::encode`].
pub fn encode(text: &str, vocab: &Vocabulary) -> Vec<u32> {
    vocab.encode(text)
}

/// Free-function form of [`Vocabulary::count_tokens`].
pub fn count_tokens(text: &str, vocab: &Vocabulary) -> TokenCount {
    vocab.count_tokens(text)
}
