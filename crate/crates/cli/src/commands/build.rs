use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use serde_json::json;
use texttiger_core::tokenizer::Vocabulary;
use texttiger_core::wikipedia::{WikipediaClient, WikipediaConfig};
use texttiger_core::witcub::{build_dataset, save_dataset, BuildOptions, HttpImageProbe, WitRow};

use super::{read_jsonl, write_jsonl, write_text, Env};
use crate::config::pick;
use crate::manifest::ManifestWriter;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON lines of {id?, caption, image_ref, entity_urls}.
    #[arg(long, value_name = "FILE")]
    pub wit_rows: PathBuf,
    /// Dataset file to write (default: <out-dir>/dataset.jsonl).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Wikipedia action API endpoint.
    #[arg(long, env = "TEXTTIGER_WIKI_URL")]
    pub wiki_url: Option<String>,
    /// Minimum gap between Wikipedia requests, in milliseconds.
    #[arg(long, default_value_t = 100)]
    pub politeness_ms: u64,
    /// Per-request timeout for image probes, in seconds.
    #[arg(long, default_value_t = 20)]
    pub image_timeout: u64,
}

pub fn run(env: &Env, args: Args) -> Result<()> {
    let (out, dir) = env.output(args.out, "dataset.jsonl");
    let parallel = pick(args.parallel, env.config.parallel, 4).max(1);
    let wiki = WikipediaConfig {
        endpoint: pick(args.wiki_url, env.config.wiki_url.clone(), WikipediaConfig::default().endpoint),
        politeness_delay: Duration::from_millis(args.politeness_ms),
        ..WikipediaConfig::default()
    };
    let mut manifest = ManifestWriter::new(
        "build-dataset",
        json!({
            "wit_rows": args.wit_rows,
            "out": out,
            "parallel": parallel,
            "wiki_url": wiki.endpoint,
            "politeness_ms": args.politeness_ms,
            "image_timeout": args.image_timeout,
        }),
    );
    manifest.input(&args.wit_rows);

    let rows: Vec<WitRow> = read_jsonl(&args.wit_rows)?;
    log::info!("{} candidate rows", rows.len());
    let source = WikipediaClient::new(wiki);
    let probe = HttpImageProbe::new(Duration::from_secs(args.image_timeout));
    let outcome = build_dataset(rows, &source, &probe, Vocabulary::clip(), BuildOptions { parallel })?;

    let mut buf = Vec::new();
    save_dataset(&outcome.dataset, &mut buf)?;
    write_text(&out, std::str::from_utf8(&buf).context("dataset is not UTF-8")?)?;
    let dropped = out.with_extension("dropped.jsonl");
    write_jsonl(&dropped, &outcome.dropped)?;
    manifest.output(&out);
    manifest.output(&dropped);
    manifest.write(&dir)?;

    let stats = outcome.dataset.stats();
    log::info!("kept {} rows, dropped {}", stats.instance_count, outcome.dropped.len());
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}
