use std::path::PathBuf;

use anyhow::Result;
use serde_json::json;
use texttiger_core::audit::audit_prompts_with_clip;

use super::{read_jsonl, write_json, write_text, Env, PromptRecord, UsageError};
use crate::manifest::ManifestWriter;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Prompt files from `assemble`; may be repeated.
    #[arg(long, value_name = "FILE", required = true, num_args = 1..)]
    pub prompts: Vec<PathBuf>,
    /// Token limit (default: the configured T5 limit, 256).
    #[arg(long)]
    pub limit: Option<usize>,
    /// Also count prompts over the CLIP window.
    #[arg(long)]
    pub clip_column: bool,
}

pub fn run(env: &Env, args: Args) -> Result<()> {
    let budget = env.config.budget();
    let limit = args.limit.unwrap_or(budget.t5_limit);
    let clip = args.clip_column.then_some(budget.clip_limit);
    let dir = env.dir();
    let mut manifest =
        ManifestWriter::new("audit", json!({"prompts": args.prompts, "limit": limit, "clip_limit": clip}));

    let mut prompts = Vec::new();
    for path in &args.prompts {
        manifest.input(path);
        prompts.extend(read_jsonl::<PromptRecord>(path)?.into_iter().map(|r| r.prompt));
    }
    let report = audit_prompts_with_clip(&prompts, limit, clip).map_err(|e| UsageError(e.to_string()))?;
    let table = report.render_table();

    let json_path = dir.join("audit.json");
    let txt_path = dir.join("audit.txt");
    write_json(&json_path, &report)?;
    write_text(&txt_path, &table)?;
    manifest.output(&json_path);
    manifest.output(&txt_path);
    manifest.write(&dir)?;
    print!("{table}");
    Ok(())
}
