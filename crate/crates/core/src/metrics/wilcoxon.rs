use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::midranks;
use crate::error::{Error, Result};

/// Largest number of nonzero differences handled with the exact null
/// distribution.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alternative {
    /// `x` tends to exceed `y`.
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of positive differences.
    pub statistic: f64,
    /// Number of nonzero differences.
    pub n: usize,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Paired signed-rank test of `x - y`. Zero differences are dropped and tied
/// magnitudes share midranks. With at most [`EXACT_MAX_N`] nonzero
/// differences the p-value comes from the exact permutation distribution
/// of the observed ranks; otherwise from a normal approximation with tie
/// and continuity corrections.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64], alternative: Alternative) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 6 {
        return Err(Error::Value(format!(
            "signed-rank test needs at least 6 pairs, got {}",
            x.len()
        )));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Numeric("non-finite paired difference".into()));
    }
    if diffs.is_empty() {
        return Err(Error::Value("all paired differences are zero".into()));
    }
    let Alternative::Greater = alternative;
    let n = diffs.len();
    let mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&mags);
    let statistic: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    if n <= EXACT_MAX_N {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let observed = (2.0 * statistic).round() as usize;
        Ok(WilcoxonResult {
            statistic,
            n,
            p_value: exact_upper_tail(&doubled, observed),
            method: WilcoxonMethod::Exact,
        })
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
        let mut sorted = mags.clone();
        sorted.sort_by(f64::total_cmp);
        let mut start = 0;
        while start < sorted.len() {
            let mut end = start + 1;
            while end < sorted.len() && sorted[end] == sorted[start] {
                end += 1;
            }
            let t = (end - start) as f64;
            var -= (t * t * t - t) / 48.0;
            start = end;
        }
        let z = (statistic - mean - 0.5) / var.sqrt();
        Ok(WilcoxonResult {
            statistic,
            n,
            p_value: 0.5 * erfc(z / std::f64::consts::SQRT_2),
            method: WilcoxonMethod::Normal,
        })
    }
}

/// `P(sum of a random subset of doubled ranks >= observed)` with every
/// subset equally likely.
pub(crate) fn exact_upper_tail(doubled_ranks: &[usize], observed: usize) -> f64 {
    let total: usize = doubled_ranks.iter().sum();
    let mut ways = vec![0.0f64; total + 1];
    ways[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        for s in (0..=reach).rev() {
            if ways[s] != 0.0 {
                ways[s + r] += ways[s];
            }
        }
        reach += r;
    }
    let tail: f64 = ways[observed.min(total + 1)..].iter().sum();
    tail / 2f64.powi(doubled_ranks.len() as i32)
}
