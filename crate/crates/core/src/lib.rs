pub mod audit;
mod http;
pub mod llm;
pub mod metrics;
pub mod promptgen;
pub mod refine;
pub mod stub;
pub mod tokenizer;
pub mod wikipedia;
pub mod witcub;

pub use audit::{audit_prompts, AuditError, AuditReport, MethodAudit};
pub use llm::{ChatClient, ChatClientConfig, CompletionClient, CompletionRequest, LlmError};
pub use metrics::{EmbeddingVector, GaussianStats, LabelDistributionSet, MetricReport, MetricsError};
pub use promptgen::{assemble_prompt, AssembledPrompt, ImageGenRequest, Note, PromptError, PromptMethod};
pub use refine::{summarize, RefineError, SummarizeConfig, SummaryMethod, SummaryResult};
pub use tokenizer::{count_tokens, encode, TokenBudget, TokenCount, Vocabulary};
pub use witcub::{Dataset, DatasetStats, EntityEntry, WitCubInstance};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
