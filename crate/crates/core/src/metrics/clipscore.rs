use super::features::FeatureMatrix;
use super::MetricsError;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    norm_sq: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        let norm_sq = values.iter().map(|v| v * v).sum();
        Self { values, norm_sq }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

impl From<Vec<f64>> for EmbeddingVector {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, MetricsError> {
    if a.dim() != b.dim() {
        return Err(MetricsError::Dimension(format!("embedding dimensions differ: {} vs {}", a.dim(), b.dim())));
    }
    if !(a.norm_sq > 0.0) || !(b.norm_sq > 0.0) {
        return Err(MetricsError::ZeroVector);
    }
    if !a.norm_sq.is_finite() || !b.norm_sq.is_finite() {
        return Err(MetricsError::Numeric("non-finite embedding".into()));
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    // sqrt(|a|^2 |b|^2) makes a.a / (|a| |a|) exactly 1; fall back to the
    // product of norms if the squared product leaves the f64 range.
    let squared = a.norm_sq * b.norm_sq;
    let denom = if squared.is_normal() { squared.sqrt() } else { a.norm() * b.norm() };
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// Text-image relevance as a raw cosine in [-1, 1].
pub fn clip_score_txt_img(img: &EmbeddingVector, txt: &EmbeddingVector) -> Result<f64, MetricsError> {
    cosine(img, txt)
}

/// Image-image similarity as a raw cosine in [-1, 1].
pub fn clip_score_img_img(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, MetricsError> {
    cosine(a, b)
}

/// Mean cosine over row-aligned pairs, summed in row order.
pub fn mean_pair_score(left: &FeatureMatrix, right: &FeatureMatrix) -> Result<f64, MetricsError> {
    if left.rows() != right.rows() {
        return Err(MetricsError::Dimension(format!("pair counts differ: {} vs {}", left.rows(), right.rows())));
    }
    if left.rows() == 0 {
        return Err(MetricsError::InsufficientSamples(0));
    }
    let mut total = 0.0;
    for i in 0..left.rows() {
        total += cosine(&left.row_f64(i).into(), &right.row_f64(i).into())?;
    }
    Ok(total / left.rows() as f64)
}
