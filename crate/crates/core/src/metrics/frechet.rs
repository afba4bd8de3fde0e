use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::features::FeatureMatrix;
use super::MetricsError;

/// Mean and covariance (divisor N-1) of a feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub sample_count: usize,
}

impl GaussianStats {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>, sample_count: usize) -> Result<Self, MetricsError> {
        let d = mean.len();
        if covariance.shape() != (d, d) {
            return Err(MetricsError::Dimension(format!(
                "mean has dimension {d}, covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        Ok(Self { mean, covariance, sample_count })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

pub fn gaussian_stats(features: &FeatureMatrix) -> Result<GaussianStats, MetricsError> {
    gaussian_stats_of(&features.to_dmatrix())
}

/// Same as [`gaussian_stats`] for an in-memory N x d matrix.
pub fn gaussian_stats_of(x: &DMatrix<f64>) -> Result<GaussianStats, MetricsError> {
    let n = x.nrows();
    if n < 2 {
        return Err(MetricsError::InsufficientSamples(n));
    }
    let mean = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let covariance = symmetric_part(&(centered.transpose() * &centered / (n - 1) as f64));
    GaussianStats::new(mean, covariance, n)
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues
/// from round-off are clamped to zero.
fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetric_part(m));
    let mut scaled = eig.eigenvectors.clone();
    for (mut column, &l) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        column *= l.max(0.0).sqrt();
    }
    scaled * eig.eigenvectors.transpose()
}

/// Fréchet distance between two Gaussians:
/// `|mu_r - mu_g|^2 + tr(S_r) + tr(S_g) - 2 tr((S_r S_g)^{1/2})`.
///
/// The trace term is evaluated as the sum of square roots of the eigenvalues
/// of `S_r^{1/2} S_g S_r^{1/2}`, which is symmetric PSD and has the same
/// spectrum as `S_r S_g`.
pub fn frechet_distance(real: &GaussianStats, generated: &GaussianStats) -> Result<f64, MetricsError> {
    if real.dim() != generated.dim() {
        return Err(MetricsError::Dimension(format!(
            "feature dimensions differ: {} vs {}",
            real.dim(),
            generated.dim()
        )));
    }
    let finite = |s: &GaussianStats| s.mean.iter().chain(s.covariance.iter()).all(|v| v.is_finite());
    if !finite(real) || !finite(generated) {
        return Err(MetricsError::Numeric("non-finite mean or covariance".into()));
    }

    let root_r = psd_sqrt(&real.covariance);
    let inner = symmetric_part(&(&root_r * &generated.covariance * &root_r));
    // Only the spectrum is needed here; skipping eigenvectors is much cheaper.
    let trace_sqrt: f64 = inner.symmetric_eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).sum();

    let diff = &real.mean - &generated.mean;
    let d = diff.dot(&diff) + real.covariance.trace() + generated.covariance.trace() - 2.0 * trace_sqrt;
    if !d.is_finite() {
        return Err(MetricsError::Numeric(format!("distance evaluated to {d}")));
    }
    Ok(d.max(0.0))
}
