use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use texttiger_core::promptgen::{generate_image, GeneratedImageRef, HttpImageBackend, ImageGenRequest, PromptMethod};

use super::{read_jsonl, required, write_jsonl, Env, PromptRecord};
use crate::config::pick;
use crate::manifest::ManifestWriter;

pub const DEFAULT_MODEL: &str = "flux.1-dev";

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_name = "FILE")]
    pub prompts: PathBuf,
    /// Image records to write (default: <out-dir>/images.jsonl).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "TEXTTIGER_IMAGE_URL")]
    pub backend_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 3.5)]
    pub guidance: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: u32,
    #[arg(long, default_value_t = 1024)]
    pub width: u32,
    #[arg(long, default_value_t = 1024)]
    pub height: u32,
    #[arg(long, default_value_t = 512)]
    pub max_sequence_length: u32,
    /// Where returned image bytes are stored (default: <out-dir>/images).
    #[arg(long, value_name = "DIR")]
    pub image_dir: Option<PathBuf>,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 600)]
    pub timeout: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ImageRecord {
    id: String,
    method: PromptMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image: Option<GeneratedImageRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// File stem for an instance's image: id and method, path-safe.
fn image_name(id: &str, method: PromptMethod) -> String {
    let safe: String =
        id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{safe}.{}", method.slug())
}

pub fn run(env: &Env, args: Args) -> Result<()> {
    let url = required(
        args.backend_url.clone().or_else(|| env.config.backend.url.clone()),
        "image backend (--backend-url, TEXTTIGER_IMAGE_URL or backend.url)",
    )?;
    let model = pick(args.model.clone(), env.config.backend.model.clone(), DEFAULT_MODEL.to_string());
    let (out, dir) = env.output(args.out.clone(), "images.jsonl");
    let image_dir = args.image_dir.clone().unwrap_or_else(|| dir.join("images"));
    let template = ImageGenRequest {
        seed: args.seed,
        guidance_scale: args.guidance,
        steps: args.steps,
        width: args.width,
        height: args.height,
        max_sequence_length: args.max_sequence_length,
        ..ImageGenRequest::new("", model)
    };
    let mut manifest = ManifestWriter::new(
        "generate",
        json!({"prompts": args.prompts, "out": out, "backend_url": url, "image_dir": image_dir, "request": template, "timeout": args.timeout}),
    );
    manifest.input(&args.prompts);

    let prompts: Vec<PromptRecord> = read_jsonl(&args.prompts)?;
    let backend = HttpImageBackend::new(url, &image_dir, Duration::from_secs(args.timeout));
    let mut records = Vec::with_capacity(prompts.len());
    for p in &prompts {
        let request = ImageGenRequest { prompt: p.prompt.text.clone(), ..template.clone() };
        let name = image_name(&p.id, p.prompt.method);
        let (image, error) = match generate_image(&request, &backend, &name) {
            Ok(img) => (Some(img), None),
            Err(e) => {
                log::warn!("{name}: {e}");
                (None, Some(e.to_string()))
            }
        };
        records.push(ImageRecord { id: p.id.clone(), method: p.prompt.method, image, error });
    }

    write_jsonl(&out, &records)?;
    manifest.output(&out);
    manifest.write(&dir)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    log::info!("{} images requested, {failed} failed", records.len());
    if failed > 0 {
        bail!("{failed} generation request(s) failed; see {}", out.display());
    }
    Ok(())
}
