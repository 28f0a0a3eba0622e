//! Rank-statistic ROC-AUC with average ranks for tied scores.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub auc: f64,
    /// `(false-positive rate, true-positive rate)` from (0, 0) to (1, 1), one
    /// point per distinct score.
    pub points: Vec<(f64, f64)>,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// AUC as `(Σ ranks of positives − P(P+1)/2) / (P·N)`, which equals
/// `P(pos > neg) + ½ P(pos = neg)`. Errors unless both classes are present.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Eval(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Eval(format!("score {i} is NaN")));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Eval(format!(
            "AUC needs both classes, got {n_pos} positive and {n_neg} negative"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start..end (0-based) share the mean 1-based rank
        let avg = (start + end + 1) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i]).count();
        rank_sum += avg * pos_in_group as f64;
        start = end;
    }
    let p = n_pos as f64;
    let auc = (rank_sum - p * (p + 1.0) / 2.0) / (p * n_neg as f64);

    // Sweep thresholds from the highest score down.
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut end = order.len();
    while end > 0 {
        let mut start = end - 1;
        while start > 0 && scores[order[start - 1]] == scores[order[end - 1]] {
            start -= 1;
        }
        for &i in &order[start..end] {
            if labels[i] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        end = start;
    }
    Ok(RocCurve {
        auc,
        points,
        n_pos,
        n_neg,
    })
}

/// Trapezoidal area under a polyline of `(x, y)` points.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}
