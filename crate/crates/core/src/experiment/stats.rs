use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graphstore::{degree_distribution, layer_overlap, DegreeMode, MultilayerGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub layer: usize,
    pub directed: bool,
    pub edges: usize,
    /// Degree value to node count, per degree mode.
    pub degrees: BTreeMap<DegreeMode, BTreeMap<usize, usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPairOverlap {
    pub first: usize,
    pub second: usize,
    pub jaccard: f64,
}

/// Layer sizes, degree histograms and pairwise edge overlaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub nodes: usize,
    pub layers: Vec<LayerSummary>,
    pub overlaps: Vec<LayerPairOverlap>,
}

/// Summaries of every layer, and overlaps for `pairs` (all pairs when
/// empty).
pub fn stats_command(g: &MultilayerGraph, pairs: &[(usize, usize)]) -> Result<StatsReport> {
    let mut layers = Vec::new();
    for (k, layer) in g.layers().iter().enumerate() {
        let modes: &[DegreeMode] = if layer.is_directed() {
            &[DegreeMode::In, DegreeMode::Out, DegreeMode::Total]
        } else {
            &[DegreeMode::Total]
        };
        let mut degrees = BTreeMap::new();
        for &m in modes {
            degrees.insert(m, degree_distribution(g, k, m)?);
        }
        layers.push(LayerSummary {
            layer: k,
            directed: layer.is_directed(),
            edges: layer.edge_count(),
            degrees,
        });
    }
    let pairs: Vec<(usize, usize)> = if pairs.is_empty() {
        let k = g.layer_count();
        (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect()
    } else {
        pairs.to_vec()
    };
    let overlaps = pairs
        .iter()
        .map(|&(a, b)| {
            Ok(LayerPairOverlap {
                first: a,
                second: b,
                jaccard: layer_overlap(g, a, b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StatsReport {
        nodes: g.node_count(),
        layers,
        overlaps,
    })
}

impl StatsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {}", self.nodes);
        let _ = writeln!(
            s,
            "{:>6} {:>9} {:>10} {:>10} {:>10}",
            "layer", "directed", "edges", "mean_deg", "max_deg"
        );
        for l in &self.layers {
            let total = &l.degrees[&DegreeMode::Total];
            let n: usize = total.values().sum();
            let sum: usize = total.iter().map(|(d, c)| d * c).sum();
            let max = total.keys().next_back().copied().unwrap_or(0);
            let mean = if n == 0 { 0.0 } else { sum as f64 / n as f64 };
            let _ = writeln!(
                s,
                "{:>6} {:>9} {:>10} {:>10.3} {:>10}",
                l.layer, l.directed, l.edges, mean, max
            );
        }
        if !self.overlaps.is_empty() {
            let _ = writeln!(s, "{:>6} {:>6} {:>10}", "first", "second", "jaccard");
            for o in &self.overlaps {
                let _ = writeln!(s, "{:>6} {:>6} {:>10.5}", o.first, o.second, o.jaccard);
            }
        }
        s
    }
}
