//! Per-method token accounting over assembled prompts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::render_aligned;
use crate::promptgen::{AssembledPrompt, PromptMethod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("no prompts to audit")]
    EmptyAudit,
    #[error("token limit must be positive")]
    ZeroLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAudit {
    pub mean_tokens: f64,
    pub violations: usize,
    pub n: usize,
    /// Prompts longer than `AuditReport::clip_limit`, when that column is requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_violations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub per_method: BTreeMap<PromptMethod, MethodAudit>,
    pub limit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_limit: Option<usize>,
}

pub fn audit_prompts(prompts: &[AssembledPrompt], limit: usize) -> Result<AuditReport, AuditError> {
    audit_prompts_with_clip(prompts, limit, None)
}

/// Like [`audit_prompts`], additionally counting prompts over `clip_limit`.
pub fn audit_prompts_with_clip(
    prompts: &[AssembledPrompt],
    limit: usize,
    clip_limit: Option<usize>,
) -> Result<AuditReport, AuditError> {
    if limit == 0 || clip_limit == Some(0) {
        return Err(AuditError::ZeroLimit);
    }
    if prompts.is_empty() {
        return Err(AuditError::EmptyAudit);
    }
    // (token sum, n, violations, clip violations); integer sums keep the
    // result independent of input order.
    let mut acc: BTreeMap<PromptMethod, (u64, usize, usize, usize)> = BTreeMap::new();
    for p in prompts {
        let tokens = p.token_count.get();
        let e = acc.entry(p.method).or_default();
        e.0 += tokens as u64;
        e.1 += 1;
        e.2 += usize::from(tokens > limit);
        e.3 += usize::from(clip_limit.is_some_and(|c| tokens > c));
    }
    let per_method = acc
        .into_iter()
        .map(|(method, (sum, n, violations, clip))| {
            let audit = MethodAudit {
                mean_tokens: sum as f64 / n as f64,
                violations,
                n,
                clip_violations: clip_limit.map(|_| clip),
            };
            (method, audit)
        })
        .collect();
    Ok(AuditReport { per_method, limit, clip_limit })
}

impl AuditReport {
    /// Aligned text table: method, average tokens, violations of the limit.
    pub fn render_table(&self) -> String {
        let mut header = vec!["Method".to_string(), "Avg. tokens".to_string(), format!("# > {}", self.limit)];
        if let Some(c) = self.clip_limit {
            header.push(format!("# > {c}"));
        }
        let body: Vec<Vec<String>> = self
            .per_method
            .iter()
            .map(|(method, a)| {
                let mut row =
                    vec![method.display_name().to_string(), format!("{:.2}", a.mean_tokens), a.violations.to_string()];
                if self.clip_limit.is_some() {
                    row.push(a.clip_violations.unwrap_or(0).to_string());
                }
                row
            })
            .collect();
        render_aligned(&header.iter().map(String::as_str).collect::<Vec<_>>(), &body)
    }
}
