//! Image-quality and alignment metrics over precomputed feature files.

mod clipscore;
pub mod features;
mod frechet;
mod inception;
mod report;

use thiserror::Error;

pub use clipscore::{clip_score_img_img, clip_score_txt_img, mean_pair_score, EmbeddingVector};
pub use features::{FeatureKind, FeatureMatrix, Sidecar};
pub use frechet::{frechet_distance, gaussian_stats, gaussian_stats_of, GaussianStats};
pub use inception::{inception_score, LabelDistributionSet, PROBABILITY_FLOOR};
pub use report::{aggregate_report, render_metric_table, MetricReport, PairSet, ScaleNote, CLIP_DISPLAY_SCALE};

pub(crate) use report::render_aligned;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricsError {
    #[error("row {0} is not a probability distribution")]
    InvalidDistribution(usize),
    #[error("too few samples ({0})")]
    InsufficientSamples(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot score a zero-length embedding")]
    ZeroVector,
    #[error("bad feature file: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(String),
}
