use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Four-way direction category of the relation from a target node `u` to a
/// source node `i`. "Out" means the edge `u -> i` exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionBin {
    None = 0,
    OutOnly = 1,
    InOnly = 2,
    Reciprocal = 3,
}

impl DirectionBin {
    pub const ALL: [DirectionBin; 4] = [
        DirectionBin::None,
        DirectionBin::OutOnly,
        DirectionBin::InOnly,
        DirectionBin::Reciprocal,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            DirectionBin::None => "none",
            DirectionBin::OutOnly => "out",
            DirectionBin::InOnly => "in",
            DirectionBin::Reciprocal => "reciprocal",
        }
    }
}

pub fn assign_direction_bin(has_out: bool, has_in: bool) -> DirectionBin {
    match (has_out, has_in) {
        (false, false) => DirectionBin::None,
        (true, false) => DirectionBin::OutOnly,
        (false, true) => DirectionBin::InOnly,
        (true, true) => DirectionBin::Reciprocal,
    }
}

/// Index of the interval containing `weight` among
/// `(-inf, t1], (t1, t2], ..., (t_last, inf)`.
///
/// With integer frequencies and thresholds `[0, 1, 5]` this yields the
/// categories `0`, `1`, `2-5`, `>5`.
pub fn assign_weight_bin(weight: f64, thresholds: &[f64]) -> Result<usize> {
    if weight.is_nan() {
        return Err(Error::Value("NaN edge weight".into()));
    }
    Ok(weight_bin_unchecked(weight, thresholds))
}

#[inline]
pub(crate) fn weight_bin_unchecked(weight: f64, thresholds: &[f64]) -> usize {
    thresholds.partition_point(|&t| t < weight)
}

/// Nearest-rank percentiles of `weights`, with repeated cut points collapsed.
///
/// The `p`-th percentile is the value at rank `ceil(p / 100 * n)` (1-based,
/// at least 1) of the sorted weights.
pub fn percentile_thresholds(weights: &[f64], percentiles: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::Value("percentile thresholds need at least one weight".into()));
    }
    if weights.iter().any(|w| w.is_nan()) {
        return Err(Error::Value("NaN edge weight".into()));
    }
    if percentiles.iter().any(|p| !(0.0..=100.0).contains(p)) {
        return Err(Error::Value(format!(
            "percentiles must lie in [0, 100], got {percentiles:?}"
        )));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut ps = percentiles.to_vec();
    ps.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = ps
        .iter()
        .map(|p| {
            let rank = ((p / 100.0) * n as f64).ceil() as usize;
            sorted[rank.clamp(1, n) - 1]
        })
        .collect();
    out.dedup();
    Ok(out)
}

/// Mixed-radix encoding with the first layer most significant.
pub fn assign_product_bin(per_layer_bins: &[usize], per_layer_counts: &[usize]) -> Result<usize> {
    if per_layer_bins.len() != per_layer_counts.len() {
        return Err(Error::Dimension {
            expected: per_layer_counts.len(),
            actual: per_layer_bins.len(),
        });
    }
    let mut code = 0usize;
    for (&b, &c) in per_layer_bins.iter().zip(per_layer_counts) {
        if b >= c {
            return Err(Error::Range {
                what: "layer bin",
                value: b,
                limit: c,
            });
        }
        code = code
            .checked_mul(c)
            .and_then(|x| x.checked_add(b))
            .ok_or_else(|| Error::Value("product bin index overflows".into()))?;
    }
    Ok(code)
}

/// Inverse of [`assign_product_bin`].
pub fn decode_product_bin(mut code: usize, per_layer_counts: &[usize]) -> Vec<usize> {
    let mut out = vec![0; per_layer_counts.len()];
    for (slot, &c) in out.iter_mut().zip(per_layer_counts).rev() {
        *slot = code % c;
        code /= c;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direction_examples() {
        assert_eq!(assign_direction_bin(true, false), DirectionBin::OutOnly);
        assert_eq!(assign_direction_bin(true, true), DirectionBin::Reciprocal);
        assert_eq!(assign_direction_bin(false, false), DirectionBin::None);
        assert_eq!(assign_direction_bin(false, true), DirectionBin::InOnly);
    }

    #[test]
    fn frequency_scheme() {
        let fb = [0.0, 1.0, 5.0];
        assert_eq!(assign_weight_bin(3.0, &fb).unwrap(), 2);
        assert_eq!(assign_weight_bin(0.0, &fb).unwrap(), 0);
        assert_eq!(assign_weight_bin(7.0, &fb).unwrap(), 3);
        assert_eq!(assign_weight_bin(1.0, &fb).unwrap(), 1);
        assert_eq!(assign_weight_bin(5.0, &fb).unwrap(), 2);
        assert!(assign_weight_bin(f64::NAN, &fb).is_err());
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(
            percentile_thresholds(&[1.0, 2.0, 3.0, 4.0], &[25.0, 50.0, 75.0]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            percentile_thresholds(&[5.0; 9], &[25.0, 50.0, 75.0]).unwrap(),
            vec![5.0]
        );
        assert_eq!(percentile_thresholds(&[10.0], &[25.0, 50.0, 75.0]).unwrap(), vec![10.0]);
        assert!(percentile_thresholds(&[], &[50.0]).is_err());
    }

    #[test]
    fn product_examples() {
        assert_eq!(assign_product_bin(&[0, 0], &[4, 4]).unwrap(), 0);
        assert_eq!(assign_product_bin(&[2, 1], &[4, 4]).unwrap(), 9);
        assert_eq!(assign_product_bin(&[3], &[4]).unwrap(), 3);
        assert!(assign_product_bin(&[4, 0], &[4, 4]).is_err());
    }

    proptest! {
        #[test]
        fn product_bin_is_bijective(counts in prop::collection::vec(1usize..6, 1..4)) {
            let total: usize = counts.iter().product();
            let mut seen = vec![false; total];
            for code in 0..total {
                let tuple = decode_product_bin(code, &counts);
                let back = assign_product_bin(&tuple, &counts).unwrap();
                prop_assert_eq!(back, code);
                prop_assert!(!seen[back]);
                seen[back] = true;
            }
        }

        #[test]
        fn weight_bin_monotone(
            mut thresholds in prop::collection::vec(0.0f64..100.0, 0..6),
            a in 0.0f64..120.0,
            b in 0.0f64..120.0,
        ) {
            thresholds.sort_by(f64::total_cmp);
            thresholds.dedup();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(assign_weight_bin(lo, &thresholds).unwrap() <= assign_weight_bin(hi, &thresholds).unwrap());
        }

        #[test]
        fn percentiles_nondecreasing(weights in prop::collection::vec(0.0f64..50.0, 1..40)) {
            let t = percentile_thresholds(&weights, &[10.0, 25.0, 50.0, 75.0, 90.0]).unwrap();
            prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
