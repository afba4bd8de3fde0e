use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::clipscore::mean_pair_score;
use super::features::FeatureMatrix;
use super::frechet::{frechet_distance, gaussian_stats};
use super::inception::{inception_score, LabelDistributionSet};
use super::MetricsError;

/// Factor applied to cosine scores in the text table only.
pub const CLIP_DISPLAY_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleNote {
    /// JSON holds raw cosines; tables print them multiplied by 100.
    RawCosineDisplayedX100,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub is_mean: f64,
    pub is_std: f64,
    pub fid: f64,
    pub clip_txt_img_mean: f64,
    pub clip_img_img_mean: f64,
    pub scale_note: ScaleNote,
}

/// Row-aligned embedding pairs; row i of `left` is scored against row i of `right`.
#[derive(Debug, Clone, Copy)]
pub struct PairSet<'a> {
    pub left: &'a FeatureMatrix,
    pub right: &'a FeatureMatrix,
}

pub fn aggregate_report(
    label_dists: &LabelDistributionSet,
    real_features: &FeatureMatrix,
    gen_features: &FeatureMatrix,
    txt_pairs: PairSet<'_>,
    img_pairs: PairSet<'_>,
    splits: usize,
) -> Result<MetricReport, MetricsError> {
    let (is_mean, is_std) = inception_score(label_dists, splits)?;
    let fid = frechet_distance(&gaussian_stats(real_features)?, &gaussian_stats(gen_features)?)?;
    Ok(MetricReport {
        is_mean,
        is_std,
        fid,
        clip_txt_img_mean: mean_pair_score(txt_pairs.left, txt_pairs.right)?,
        clip_img_img_mean: mean_pair_score(img_pairs.left, img_pairs.right)?,
        scale_note: ScaleNote::RawCosineDisplayedX100,
    })
}

/// Aligned text table, one row per labelled report.
pub fn render_metric_table(rows: &[(String, MetricReport)]) -> String {
    let header = ["Method", "IS", "FID", "CLIP Txt-Img", "CLIP Img-Img"];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, r)| {
            vec![
                name.clone(),
                format!("{:.2} ± {:.2}", r.is_mean, r.is_std),
                format!("{:.2}", r.fid),
                format!("{:.2}", r.clip_txt_img_mean * CLIP_DISPLAY_SCALE),
                format!("{:.2}", r.clip_img_img_mean * CLIP_DISPLAY_SCALE),
            ]
        })
        .collect();
    let mut out = render_aligned(&header, &body);
    out.push_str("CLIP scores shown as 100 x cosine.\n");
    out
}

/// Left-aligned first column, right-aligned others.
pub(crate) fn render_aligned(header: &[&str], body: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut text = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                text.push_str("  ");
            }
            let pad = w - cell.chars().count();
            if i == 0 {
                let _ = write!(text, "{cell}{}", " ".repeat(pad));
            } else {
                let _ = write!(text, "{}{cell}", " ".repeat(pad));
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for row in body {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn degenerate_inputs() {
        let labels = LabelDistributionSet::new(vec![vec![0.5, 0.5]; 4]).unwrap();
        let feats = fm(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        let emb = fm(&[&[0.1, 0.9], &[0.4, 0.2]]);
        let pairs = PairSet { left: &emb, right: &emb };
        let r = aggregate_report(&labels, &feats, &feats, pairs, pairs, 1).unwrap();
        assert_eq!(r.is_mean, 1.0);
        assert!(r.fid.abs() < 1e-12);
        assert!((r.clip_txt_img_mean - 1.0).abs() < 1e-12);
        assert!((r.clip_img_img_mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_pairs() {
        let labels = LabelDistributionSet::new(vec![vec![1.0]; 2]).unwrap();
        let feats = fm(&[&[0.0], &[1.0]]);
        let one = fm(&[&[1.0]]);
        let r = aggregate_report(
            &labels,
            &feats,
            &feats,
            PairSet { left: &feats, right: &one },
            PairSet { left: &one, right: &one },
            1,
        );
        assert!(matches!(r, Err(MetricsError::Dimension(_))));
    }

    #[test]
    fn table_scales_clip_only() {
        let r = MetricReport {
            is_mean: 12.3456,
            is_std: 0.5,
            fid: 2.0,
            clip_txt_img_mean: 0.3012,
            clip_img_img_mean: 0.68,
            scale_note: ScaleNote::RawCosineDisplayedX100,
        };
        let table = render_metric_table(&[("TextTIGER".into(), r.clone())]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "Method               IS   FID  CLIP Txt-Img  CLIP Img-Img");
        assert_eq!(lines[2], "TextTIGER  12.35 ± 0.50  2.00         30.12         68.00");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["clip_txt_img_mean"], 0.3012);
        assert_eq!(json["scale_note"], "raw_cosine_displayed_x100");
    }
}
