use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::Result;
use serde_json::json;
use texttiger_core::promptgen::{assemble_prompt, Note, PromptError, PromptMethod};
use texttiger_core::refine::build_augmentation;
use texttiger_core::tokenizer::Vocabulary;
use texttiger_core::witcub::Dataset;

use super::summarize::{Status, SummaryRecord};
use super::{read_dataset, read_jsonl, write_jsonl, Env, PromptRecord, UsageError};
use crate::config::methods;
use crate::manifest::ManifestWriter;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<PromptMethod>,
    /// Output of `summarize`; needed by the summary-based methods.
    #[arg(long, value_name = "FILE")]
    pub summaries: Option<PathBuf>,
    /// Prompt records to write (default: <out-dir>/prompts.jsonl).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn run(env: &Env, args: Args) -> Result<()> {
    let dataset_path = env.dataset_path(args.dataset)?;
    let methods = methods(args.method, &env.config)?;
    if args.summaries.is_none() {
        if let Some(m) = methods.iter().find(|m| m.summary_method().is_some()) {
            return Err(UsageError(format!("{m} needs --summaries")).into());
        }
    }
    let (out, dir) = env.output(args.out, "prompts.jsonl");
    let budget = env.config.budget();
    let mut manifest = ManifestWriter::new(
        "assemble",
        json!({"dataset": dataset_path, "summaries": args.summaries, "methods": methods, "budget": budget, "out": out}),
    );
    manifest.input(&dataset_path);
    let summaries: Vec<SummaryRecord> = match &args.summaries {
        Some(path) => {
            manifest.input(path);
            read_jsonl(path)?
        }
        None => Vec::new(),
    };

    let dataset = read_dataset(&dataset_path)?;
    let (records, skipped) = assemble_all(&dataset, &methods, &summaries, &budget);
    for (id, method, reason) in &skipped {
        log::warn!("{id} ({method}): skipped, {reason}");
    }
    write_jsonl(&out, &records)?;
    manifest.output(&out);
    manifest.write(&dir)?;
    log::info!("{} prompts written, {} skipped", records.len(), skipped.len());
    Ok(())
}

type Skipped = (String, PromptMethod, String);

fn assemble_all(
    dataset: &Dataset,
    methods: &[PromptMethod],
    summaries: &[SummaryRecord],
    budget: &texttiger_core::tokenizer::TokenBudget,
) -> (Vec<PromptRecord>, Vec<Skipped>) {
    let lookup: HashMap<(&str, PromptMethod), &SummaryRecord> =
        summaries.iter().map(|r| ((r.id.as_str(), r.method), r)).collect();
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &method in methods {
        for inst in dataset.instances() {
            let aug;
            let note = match method {
                PromptMethod::CapOnly => None,
                PromptMethod::CapAugOnly => {
                    aug = build_augmentation(inst);
                    Some(Note::Entities(&aug.per_entity))
                }
                _ => match lookup.get(&(inst.id.as_str(), method)) {
                    Some(SummaryRecord { status: Status::Ok, summary: Some(s), .. }) => Some(Note::Text(&s.text)),
                    Some(r) => {
                        skipped.push((inst.id.clone(), method, format!("summary status {:?}", r.status)));
                        continue;
                    }
                    None => {
                        skipped.push((inst.id.clone(), method, "no summary record".into()));
                        continue;
                    }
                },
            };
            match assemble_prompt(method, &inst.caption, note, Vocabulary::clip(), budget) {
                Ok(prompt) => records.push(PromptRecord { id: inst.id.clone(), prompt }),
                Err(e @ (PromptError::MissingDescription(_) | PromptError::EmptyCaption)) => {
                    skipped.push((inst.id.clone(), method, e.to_string()));
                }
            }
        }
    }
    (records, skipped)
}
