//! Deterministic inputs shared by the benchmarks.

use texttiger_core::metrics::{FeatureMatrix, MetricsError};

const WORDS: &[&str] = &[
    "Phahurat",
    "Road",
    "market",
    "Bangkok",
    "temple",
    "river",
    "Nore",
    "Kilkenny",
    "castle",
    "bridge",
    "at",
    "dusk",
    "the",
    "old",
    "quarter's",
    "1890s",
    "façade",
    "café",
    "—",
    "view",
    "from",
    "north",
    "pier",
    "&amp;",
];

fn xorshift(seed: u64) -> impl FnMut() -> u64 {
    let mut state = seed | 1;
    move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    }
}

/// `n` captions of 5..=40 words drawn from a small mixed vocabulary.
pub fn captions(n: usize) -> Vec<String> {
    let mut next = xorshift(0x9E37_79B9_7F4A_7C15);
    (0..n)
        .map(|_| {
            let len = 5 + (next() % 36) as usize;
            (0..len).map(|_| WORDS[(next() % WORDS.len() as u64) as usize]).collect::<Vec<_>>().join(" ")
        })
        .collect()
}

/// Uniform noise in [-0.5, 0.5) with column-dependent scale; `seed`
/// separates sets.
pub fn features(rows: usize, cols: usize, seed: u64) -> Result<FeatureMatrix, MetricsError> {
    let mut next = xorshift(seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(88_172_645_463_325_252));
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|j| ((next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * (1.0 + j as f64 / cols as f64))
                .collect()
        })
        .collect();
    FeatureMatrix::from_rows(&data)
}
