use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use texttiger_core::metrics::features::load_features;
use texttiger_core::metrics::{
    aggregate_report, render_metric_table, FeatureKind, FeatureMatrix, LabelDistributionSet, MetricReport, PairSet,
};

use super::{required, write_json, write_text, Env, UsageError};
use crate::config::pick;
use crate::manifest::ManifestWriter;

/// Label rows stored as f32 rarely sum to 1 within the library's 1e-6; rows
/// within the extractor's 1e-5 contract are renormalized, others rejected.
const ROW_SUM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Classifier label distributions of the generated images.
    #[arg(long, value_name = "FILE")]
    pub label_dist: Option<PathBuf>,
    /// Pool features of the reference images.
    #[arg(long, value_name = "FILE")]
    pub real_features: Option<PathBuf>,
    /// Pool features of the generated images.
    #[arg(long, value_name = "FILE")]
    pub gen_features: Option<PathBuf>,
    /// CLIP image embeddings of the generated images.
    #[arg(long, value_name = "FILE")]
    pub clip_img: Option<PathBuf>,
    /// CLIP text embeddings of the prompts, row-aligned with --clip-img.
    #[arg(long, value_name = "FILE")]
    pub clip_txt: Option<PathBuf>,
    /// CLIP image embeddings of the reference images, row-aligned with --clip-img.
    #[arg(long, value_name = "FILE")]
    pub clip_real_img: Option<PathBuf>,
    /// Contiguous splits for the IS mean and standard deviation.
    #[arg(long)]
    pub splits: Option<usize>,
    /// Row label in the report table.
    #[arg(long, default_value = "run")]
    pub name: String,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    name: &'a str,
    splits: usize,
    #[serde(flatten)]
    report: &'a MetricReport,
}

fn load(path: &Path, kind: FeatureKind) -> Result<FeatureMatrix> {
    load_features(path, kind).with_context(|| format!("loading {}", path.display()))
}

fn label_distributions(matrix: &FeatureMatrix) -> Result<LabelDistributionSet> {
    let mut rows = matrix.to_rows_f64();
    for (i, row) in rows.iter_mut().enumerate() {
        let sum: f64 = row.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > ROW_SUM_TOLERANCE || row.iter().any(|&p| p < 0.0) {
            bail!("label distribution row {i} is not a probability vector (sum {sum})");
        }
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(LabelDistributionSet::new(rows)?)
}

pub fn run(env: &Env, args: Args) -> Result<()> {
    let fp = &env.config.feature_paths;
    let path = |flag: Option<PathBuf>, cfg: &Option<PathBuf>, what: &str| required(flag.or_else(|| cfg.clone()), what);
    let label_dist = path(args.label_dist, &fp.label_dist, "--label-dist")?;
    let real = path(args.real_features, &fp.real_features, "--real-features")?;
    let gen = path(args.gen_features, &fp.gen_features, "--gen-features")?;
    let clip_img = path(args.clip_img, &fp.clip_img, "--clip-img")?;
    let clip_txt = path(args.clip_txt, &fp.clip_txt, "--clip-txt")?;
    let clip_real = path(args.clip_real_img, &fp.clip_real_img, "--clip-real-img")?;
    let splits = pick(args.splits, env.config.splits, 1);
    if splits == 0 {
        bail!(UsageError("--splits must be positive".into()));
    }
    let dir = env.dir();
    let mut manifest = ManifestWriter::new(
        "evaluate",
        json!({
            "name": args.name,
            "splits": splits,
            "label_dist": label_dist,
            "real_features": real,
            "gen_features": gen,
            "clip_img": clip_img,
            "clip_txt": clip_txt,
            "clip_real_img": clip_real,
        }),
    );
    for p in [&label_dist, &real, &gen, &clip_img, &clip_txt, &clip_real] {
        manifest.input(p);
    }

    let labels = label_distributions(&load(&label_dist, FeatureKind::LabelDist)?)?;
    let real_m = load(&real, FeatureKind::PoolFeatures)?;
    let gen_m = load(&gen, FeatureKind::PoolFeatures)?;
    let img_m = load(&clip_img, FeatureKind::ClipImg)?;
    let txt_m = load(&clip_txt, FeatureKind::ClipTxt)?;
    let real_img_m = load(&clip_real, FeatureKind::ClipImg)?;
    let report = aggregate_report(
        &labels,
        &real_m,
        &gen_m,
        PairSet { left: &txt_m, right: &img_m },
        PairSet { left: &img_m, right: &real_img_m },
        splits,
    )?;

    let table = render_metric_table(&[(args.name.clone(), report.clone())]);
    let json_path = dir.join("report.json");
    let txt_path = dir.join("report.txt");
    write_json(&json_path, &ReportFile { name: &args.name, splits, report: &report })?;
    write_text(&txt_path, &table)?;
    manifest.output(&json_path);
    manifest.output(&txt_path);
    manifest.write(&dir)?;
    print!("{table}");
    Ok(())
}
