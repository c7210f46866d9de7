use crate::error::{Error, Result};
use crate::graphstore::MultilayerGraph;

use super::counts::{DegreeCounts, TrainLabels};

/// Fraction of each node's train-labeled neighbors (any direction, any of
/// `layers`) that are positive. Nodes without labeled neighbors get the
/// training base rate.
pub fn friend_conversion_baseline(g: &MultilayerGraph, layers: &[usize], train: &TrainLabels) -> Result<Vec<f64>> {
    let base = train
        .base_rate()
        .ok_or_else(|| Error::Value("no training labels for the task".into()))?;
    let d = DegreeCounts::accumulate(g, layers, train)?;
    Ok(d.plus
        .iter()
        .zip(&d.minus)
        .map(|(&p, &m)| if p + m == 0 { base } else { p as f64 / (p + m) as f64 })
        .collect())
}

/// Convenience wrapper over every layer of `g`.
pub fn friend_conversion_all_layers(g: &MultilayerGraph, train: &TrainLabels) -> Result<Vec<f64>> {
    friend_conversion_baseline(g, &g.all_layer_ids(), train)
}
