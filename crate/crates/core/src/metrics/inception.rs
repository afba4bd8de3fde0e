use super::MetricsError;

/// Probability floor used inside the logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Per-image class distributions p(y|x), one row per image.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistributionSet {
    conditionals: Vec<Vec<f64>>,
    classes: usize,
}

impl LabelDistributionSet {
    pub fn new(conditionals: Vec<Vec<f64>>) -> Result<Self, MetricsError> {
        let classes = conditionals.first().map_or(0, Vec::len);
        for (i, row) in conditionals.iter().enumerate() {
            if row.len() != classes {
                return Err(MetricsError::Dimension(format!("row {i} has {} classes, expected {classes}", row.len())));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(MetricsError::InvalidDistribution(i));
            }
        }
        Ok(Self { conditionals, classes })
    }

    pub fn len(&self) -> usize {
        self.conditionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditionals.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn conditionals(&self) -> &[Vec<f64>] {
        &self.conditionals
    }

    /// Column mean of the conditionals.
    pub fn marginal(&self) -> Vec<f64> {
        marginal(&self.conditionals, self.classes)
    }
}

/// Running mean rather than sum-then-divide: identical rows then yield a
/// marginal equal to that row bit for bit, so their KL terms vanish exactly.
fn marginal(rows: &[Vec<f64>], classes: usize) -> Vec<f64> {
    let mut m = vec![0.0; classes];
    for (k, row) in rows.iter().enumerate() {
        let weight = 1.0 / (k + 1) as f64;
        for (acc, &p) in m.iter_mut().zip(row) {
            *acc += (p - *acc) * weight;
        }
    }
    m
}

/// KL(p || q) with `0 log 0 = 0` and both arguments floored.
fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi.max(PROBABILITY_FLOOR).ln() - qi.max(PROBABILITY_FLOOR).ln()))
        .sum()
}

/// Inception Score over `splits` contiguous chunks: mean and population
/// standard deviation of `exp(E_x KL(p(y|x) || p(y)))`.
pub fn inception_score(dist: &LabelDistributionSet, splits: usize) -> Result<(f64, f64), MetricsError> {
    let n = dist.len();
    if splits == 0 || splits > n {
        return Err(MetricsError::Dimension(format!("need 1 <= splits <= N, got splits={splits}, N={n}")));
    }
    let scores: Vec<f64> = (0..splits)
        .map(|k| {
            let part = &dist.conditionals[k * n / splits..(k + 1) * n / splits];
            let py = marginal(part, dist.classes);
            let mean_kl = part.iter().map(|row| kl_divergence(row, &py)).sum::<f64>() / part.len() as f64;
            // Exact arithmetic keeps the score in [1, C]; clamp away round-off.
            mean_kl.exp().clamp(1.0, dist.classes as f64)
        })
        .collect();
    let mean = scores.iter().sum::<f64>() / splits as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / splits as f64;
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_score_one() {
        let d = LabelDistributionSet::new(vec![vec![0.2, 0.3, 0.5]; 6]).unwrap();
        assert_eq!(inception_score(&d, 1).unwrap(), (1.0, 0.0));
        assert_eq!(inception_score(&d, 3).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn uniform_rows_score_exactly_one() {
        for (n, c) in [(7, 10), (10, 3), (50, 1000), (13, 7)] {
            let d = LabelDistributionSet::new(vec![vec![1.0 / c as f64; c]; n]).unwrap();
            assert_eq!(d.marginal(), d.conditionals()[0]);
            assert_eq!(inception_score(&d, 1).unwrap().0, 1.0, "{n}x{c}");
        }
    }

    #[test]
    fn two_one_hot_rows_score_two() {
        let d = LabelDistributionSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (mean, std) = inception_score(&d, 1).unwrap();
        assert!((mean - 2.0).abs() <= 1e-12, "{mean}");
        assert_eq!(std, 0.0);
    }

    #[test]
    fn invalid_rows_rejected() {
        assert_eq!(
            LabelDistributionSet::new(vec![vec![0.5, 0.5], vec![0.6, 0.6]]).unwrap_err(),
            MetricsError::InvalidDistribution(1)
        );
        assert_eq!(LabelDistributionSet::new(vec![vec![1.5, -0.5]]).unwrap_err(), MetricsError::InvalidDistribution(0));
        assert!(LabelDistributionSet::new(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn split_bounds() {
        let d = LabelDistributionSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(inception_score(&d, 0).is_err());
        assert!(inception_score(&d, 3).is_err());
        // Each single-row split has zero KL.
        assert_eq!(inception_score(&d, 2).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn marginal_is_column_mean() {
        let d = LabelDistributionSet::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(d.marginal(), vec![0.75, 0.25]);
    }
}
