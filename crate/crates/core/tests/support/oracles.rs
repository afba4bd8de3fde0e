//! Independent reference computations used to cross-check the library.
//! Deliberately naive: plain loops and a general (non-symmetric) eigensolver.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Inception Score with an explicit double loop over images and classes.
pub fn inception_score_bruteforce(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let c = rows[0].len();
    let mut marginal = vec![0.0; c];
    for j in 0..c {
        for row in rows {
            marginal[j] += row[j];
        }
        marginal[j] /= n as f64;
    }
    let mut total = 0.0;
    for row in rows {
        for j in 0..c {
            if row[j] > 0.0 {
                total += row[j] * (row[j].max(1e-12) / marginal[j].max(1e-12)).ln();
            }
        }
    }
    (total / n as f64).exp()
}

/// Two-pass sample covariance with divisor N-1.
pub fn covariance_two_pass(x: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len();
    let d = x[0].len();
    let mut mean = vec![0.0; d];
    for row in x {
        for j in 0..d {
            mean[j] += row[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![vec![0.0; d]; d];
    for row in x {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]);
            }
        }
    }
    for r in &mut cov {
        r.iter_mut().for_each(|v| *v /= (n - 1) as f64);
    }
    (mean, cov)
}

/// Fréchet distance with the cross term from the eigenvalues of the
/// non-symmetric product S_r S_g (general Schur-based solver).
pub fn frechet_eigen_oracle(mu_r: &DVector<f64>, s_r: &DMatrix<f64>, mu_g: &DVector<f64>, s_g: &DMatrix<f64>) -> f64 {
    let product = s_r * s_g;
    let trace_sqrt: f64 = product.complex_eigenvalues().iter().map(|z| z.re.max(0.0).sqrt()).sum();
    let diff = mu_r - mu_g;
    diff.dot(&diff) + s_r.trace() + s_g.trace() - 2.0 * trace_sqrt
}

pub fn cosine_naive(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    dot / (na.sqrt() * nb.sqrt())
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Box-Muller keeps the oracle free of extra distribution crates.
    DMatrix::from_fn(rows, cols, |_, _| {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    })
}

/// Well-conditioned random SPD matrix.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = gaussian_matrix(rng, d, d);
    &a * a.transpose() / d as f64 + DMatrix::identity(d, d) * 0.1
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, d, d).qr().q()
}

/// Random probability rows, some with exact zeros.
pub fn random_distributions(rng: &mut ChaCha8Rng, n: usize, c: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> =
                (0..c).map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.001..1.0) }).collect();
            let sum: f64 = raw.iter().sum();
            if sum == 0.0 {
                let mut one_hot = vec![0.0; c];
                one_hot[rng.gen_range(0..c)] = 1.0;
                one_hot
            } else {
                raw.iter().map(|v| v / sum).collect()
            }
        })
        .collect()
}

/// Scans every byte offset of the lowercased caption for each entity's
/// name (minus a trailing " (...)"), requiring non-alphanumeric neighbours.
/// Returns entity indices ordered by first hit, without repeated names.
pub fn match_entities_bruteforce(caption: &str, names: &[String]) -> Vec<usize> {
    let hay = caption.to_lowercase();
    let mut hits = Vec::new();
    for (idx, name) in names.iter().enumerate() {
        let mut phrase = name.trim().to_string();
        if phrase.ends_with(')') {
            if let Some(open) = phrase.rfind(" (") {
                if !phrase[..open].trim().is_empty() {
                    phrase = phrase[..open].trim().to_string();
                }
            }
        }
        let phrase = phrase.to_lowercase();
        if phrase.is_empty() {
            continue;
        }
        for i in 0..=hay.len() {
            if !hay.is_char_boundary(i) || !hay[i..].starts_with(&phrase) {
                continue;
            }
            let left_ok = hay[..i].chars().last().map_or(true, |c| !c.is_alphanumeric());
            let right_ok = hay[i + phrase.len()..].chars().next().map_or(true, |c| !c.is_alphanumeric());
            if left_ok && right_ok {
                hits.push((i, idx));
                break;
            }
        }
    }
    hits.sort();
    let mut seen: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for (_, idx) in hits {
        let key = names[idx].to_lowercase();
        if !seen.contains(&key) {
            seen.push(key);
            out.push(idx);
        }
    }
    out
}
