mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Env, UsageError};
use config::RunConfig;

/// Entity-aware prompt refinement and evaluation pipeline.
#[derive(Debug, Parser)]
#[command(name = "texttiger", version)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for reports and run manifests.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter raw caption rows into a dataset with entity descriptions.
    BuildDataset(commands::build::Args),
    /// Summarize each instance's entity descriptions with an LLM.
    Summarize(commands::summarize::Args),
    /// Assemble generation prompts for one or more methods.
    Assemble(commands::assemble::Args),
    /// Send assembled prompts to an image-generation backend.
    Generate(commands::generate::Args),
    /// Compute IS, FID and CLIP scores from precomputed features.
    Evaluate(commands::evaluate::Args),
    /// Report prompt lengths against a token limit.
    Audit(commands::audit::Args),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| UsageError(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    let env = Env::new(config, cli.out_dir);
    match cli.command {
        Command::BuildDataset(a) => commands::build::run(&env, a),
        Command::Summarize(a) => commands::summarize::run(&env, a),
        Command::Assemble(a) => commands::assemble::run(&env, a),
        Command::Generate(a) => commands::generate::run(&env, a),
        Command::Evaluate(a) => commands::evaluate::run(&env, a),
        Command::Audit(a) => commands::audit::run(&env, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
