use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use texttiger_core::llm::{ChatClient, ChatClientConfig};
use texttiger_core::promptgen::PromptMethod;
use texttiger_core::refine::{build_augmentation, summarize_batch, RefineError, SummarizeConfig, SummaryResult};
use texttiger_core::tokenizer::Vocabulary;

use super::{read_dataset, required, write_jsonl, Env, UsageError};
use crate::config::{methods, pick};
use crate::manifest::ManifestWriter;

pub const DEFAULT_MODEL: &str = "llama-3.1-8b-instruct";

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// texttiger-wo-len, texttiger or iterative-texttiger.
    #[arg(long)]
    pub method: Option<PromptMethod>,
    /// Summary records to write (default: <out-dir>/summaries.jsonl).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// OpenAI-compatible base URL, e.g. http://localhost:8000/v1.
    #[arg(long, env = "TEXTTIGER_LLM_URL")]
    pub llm_url: Option<String>,
    #[arg(long, env = "TEXTTIGER_LLM_API_KEY", hide_env_values = true)]
    pub api_key: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_output_tokens: Option<u32>,
    /// Upper bound on rounds for the iterative method.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Concurrent requests.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 120)]
    pub timeout: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub id: String,
    pub method: PromptMethod,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<SummaryResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub raw_outputs: Vec<String>,
}

fn config_for(method: PromptMethod, env: &Env, args: &Args) -> Result<SummarizeConfig> {
    let Some(summary_method) = method.summary_method() else {
        bail!(UsageError(format!("{method} does not use summaries")));
    };
    let s = &env.config.summarizer;
    let model = pick(args.model.clone(), s.model.clone(), DEFAULT_MODEL.to_string());
    let mut cfg = SummarizeConfig::new(summary_method, model);
    cfg.budget = env.config.budget();
    cfg.max_iterations = pick(args.max_iterations, s.max_iterations, cfg.max_iterations);
    cfg.llm.seed = pick(args.seed, s.seed, cfg.llm.seed);
    cfg.llm.temperature = pick(args.temperature, s.temperature, cfg.llm.temperature);
    cfg.llm.max_output_tokens = pick(args.max_output_tokens, s.max_output_tokens, cfg.llm.max_output_tokens);
    cfg.llm.system_prompt = s.system_prompt.clone();
    cfg.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(cfg)
}

pub fn run(env: &Env, args: Args) -> Result<()> {
    let dataset_path = env.dataset_path(args.dataset.clone())?;
    let methods = methods(args.method, &env.config)?;
    let explicit = args.method.is_some();
    let configs: Vec<(PromptMethod, SummarizeConfig)> = methods
        .into_iter()
        .filter(|m| explicit || m.summary_method().is_some())
        .map(|m| config_for(m, env, &args).map(|c| (m, c)))
        .collect::<Result<_>>()?;
    if configs.is_empty() {
        bail!(UsageError("none of the configured methods uses summaries".into()));
    }
    let endpoint = required(
        args.llm_url.clone().or_else(|| env.config.summarizer.endpoint.clone()),
        "LLM endpoint (--llm-url, TEXTTIGER_LLM_URL or summarizer.endpoint)",
    )?;
    let parallel = pick(args.parallel, env.config.parallel, 4).max(1);
    let (out, dir) = env.output(args.out.clone(), "summaries.jsonl");

    let mut manifest = ManifestWriter::new(
        "summarize",
        json!({
            "dataset": dataset_path,
            "out": out,
            "endpoint": endpoint,
            "parallel": parallel,
            "timeout": args.timeout,
            "methods": configs.iter().map(|(m, c)| json!({"method": m, "summarizer": c})).collect::<Vec<_>>(),
        }),
    );
    manifest.input(&dataset_path);

    let dataset = read_dataset(&dataset_path)?;
    let mut client_cfg = ChatClientConfig::new(endpoint);
    client_cfg.api_key = args.api_key.clone();
    client_cfg.timeout = Duration::from_secs(args.timeout);
    let client = ChatClient::new(client_cfg);

    let mut records = Vec::new();
    for (method, cfg) in &configs {
        let mut items = Vec::new();
        let mut skipped = Vec::new();
        for inst in dataset.instances() {
            let aug = build_augmentation(inst);
            if aug.is_empty() {
                skipped.push(inst.id.clone());
            } else {
                items.push((inst.id.clone(), aug.joined_text));
            }
        }
        log::info!("{method}: summarizing {} instances ({} without matched entities)", items.len(), skipped.len());
        let mut by_id: std::collections::HashMap<&str, SummaryRecord> =
            summarize_batch(&items, cfg, &client, Vocabulary::clip(), parallel)
                .into_iter()
                .map(|(id, result)| (id, record(id, *method, result)))
                .collect();
        for inst in dataset.instances() {
            let rec = by_id.remove(inst.id.as_str()).unwrap_or_else(|| SummaryRecord {
                id: inst.id.clone(),
                method: *method,
                status: Status::Skipped,
                summary: None,
                error: Some("no caption entity has a description".into()),
                raw_outputs: Vec::new(),
            });
            records.push(rec);
        }
    }

    write_jsonl(&out, &records)?;
    manifest.output(&out);
    manifest.write(&dir)?;

    let failed = records.iter().filter(|r| r.status == Status::Failed).count();
    let noncompliant = records.iter().filter(|r| r.summary.as_ref().is_some_and(|s| !s.compliant)).count();
    log::info!("{} records, {failed} failed, {noncompliant} over budget", records.len());
    if failed > 0 {
        bail!("{failed} summarization(s) failed; see {}", out.display());
    }
    Ok(())
}

fn record(id: &str, method: PromptMethod, result: Result<SummaryResult, RefineError>) -> SummaryRecord {
    let base = SummaryRecord {
        id: id.to_string(),
        method,
        status: Status::Ok,
        summary: None,
        error: None,
        raw_outputs: Vec::new(),
    };
    match result {
        Ok(summary) => SummaryRecord { summary: Some(summary), ..base },
        Err(e) => {
            log::warn!("{id}: {e}");
            let error = Some(e.to_string());
            let raw_outputs = match e {
                RefineError::Summary { raw_outputs } => raw_outputs,
                RefineError::MalformedSummary { output } => vec![output],
                _ => Vec::new(),
            };
            SummaryRecord { status: Status::Failed, error, raw_outputs, ..base }
        }
    }
}
