//! Normalized entropy, ROC-AUC, the paired signed-rank test and evaluation
//! reports.

mod report;
mod wilcoxon;

pub use report::{EvalReport, TaskMetrics};
pub use wilcoxon::{wilcoxon_signed_rank, Alternative, WilcoxonMethod, WilcoxonResult};

use crate::error::{Error, Result};
use crate::graphstore::Label;

/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` before logs.
pub const PROB_CLIP: f64 = 1e-15;

fn check_lengths(labels: usize, values: usize) -> Result<()> {
    if labels != values {
        return Err(Error::Dimension {
            expected: labels,
            actual: values,
        });
    }
    if labels == 0 {
        return Err(Error::Value("metrics need at least one sample".into()));
    }
    Ok(())
}

/// Binary entropy in nats.
fn entropy(p: f64) -> f64 {
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
}

/// Mean log-loss divided by the entropy of the empirical base rate.
pub fn normalized_entropy(labels: &[Label], probs: &[f64]) -> Result<f64> {
    check_lengths(labels.len(), probs.len())?;
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|l| l.is_pos()).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::Value(
            "normalized entropy is undefined when all labels are equal".into(),
        ));
    }
    let mut loss = 0.0;
    for (l, &p) in labels.iter().zip(probs) {
        if !p.is_finite() {
            return Err(Error::Numeric(format!("non-finite probability {p}")));
        }
        let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
        loss -= if l.is_pos() { p.ln() } else { (1.0 - p).ln() };
    }
    Ok((loss / n) / entropy(pos as f64 / n))
}

/// `100 * (ne - reference) / reference`; negative means better.
pub fn percent_ne_change(ne: f64, reference: f64) -> f64 {
    100.0 * (ne - reference) / reference
}

/// Ascending midranks (1-based) of `values`; ties share their average rank.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Area under the ROC curve via the Mann-Whitney statistic, ties counted
/// as one half.
pub fn roc_auc(labels: &[Label], scores: &[f64]) -> Result<f64> {
    check_lengths(labels.len(), scores.len())?;
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Numeric(format!("score {s} is not comparable")));
    }
    let n_pos = labels.iter().filter(|l| l.is_pos()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Value("ROC-AUC needs both classes".into()));
    }
    let ranks = midranks(scores);
    // Twice the rank sum is an integer, so the statistic is exact.
    let twice_rank_sum: f64 = labels
        .iter()
        .zip(&ranks)
        .filter(|(l, _)| l.is_pos())
        .map(|(_, r)| 2.0 * r)
        .sum();
    let twice_u = twice_rank_sum - (n_pos * (n_pos + 1)) as f64;
    Ok(twice_u / (2.0 * n_pos as f64 * n_neg as f64))
}
