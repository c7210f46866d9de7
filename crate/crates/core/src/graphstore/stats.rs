use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MultilayerGraph, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    In,
    Out,
    /// In + out for directed layers; plain degree for undirected ones.
    Total,
}

/// Jaccard similarity of two layers' edge sets, ignoring weights.
///
/// Two directed layers are compared as ordered pairs. If either layer is
/// undirected both are reduced to unordered pairs. Two empty layers are
/// identical and score 1.
pub fn layer_overlap(g: &MultilayerGraph, k1: usize, k2: usize) -> Result<f64> {
    let (a, b) = (g.layer(k1)?, g.layer(k2)?);
    let ordered = a.is_directed() && b.is_directed();
    let pairs = |layer: &super::Layer| {
        let mut v: Vec<(NodeId, NodeId)> = layer
            .edges()
            .map(|e| {
                if ordered {
                    (e.source, e.target)
                } else {
                    (e.source.min(e.target), e.source.max(e.target))
                }
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (pa, pb) = (pairs(a), pairs(b));
    if pa.is_empty() && pb.is_empty() {
        return Ok(1.0);
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < pa.len() && j < pb.len() {
        match pa[i].cmp(&pb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = pa.len() + pb.len() - common;
    Ok(common as f64 / union as f64)
}

/// Histogram degree -> number of nodes; values sum to `N`.
pub fn degree_distribution(g: &MultilayerGraph, k: usize, mode: DegreeMode) -> Result<BTreeMap<usize, usize>> {
    let layer = g.layer(k)?;
    if !layer.is_directed() && mode != DegreeMode::Total {
        return Err(Error::Mode(format!(
            "layer {k} is undirected; only the total degree is defined"
        )));
    }
    let mut hist = BTreeMap::new();
    for u in 0..g.node_count() as NodeId {
        let d = match mode {
            DegreeMode::Out => layer.out_neighbors(u).len(),
            DegreeMode::In => layer.in_neighbors(u).len(),
            DegreeMode::Total if layer.is_directed() => layer.out_neighbors(u).len() + layer.in_neighbors(u).len(),
            DegreeMode::Total => layer.out_neighbors(u).len(),
        };
        *hist.entry(d).or_insert(0) += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphstore::GraphBuilder;

    fn two_layers(a: &[(u32, u32)], b: &[(u32, u32)], directed: bool) -> MultilayerGraph {
        let mut builder = GraphBuilder::new(5);
        for edges in [a, b] {
            let k = builder.add_layer(directed);
            for &(s, t) in edges {
                builder.add_edge(k, s, t, 1.0).unwrap();
            }
        }
        builder.build().unwrap()
    }

    #[test]
    fn overlap_examples() {
        let g = two_layers(&[(0, 1), (1, 2)], &[(1, 2), (2, 3)], true);
        assert!((layer_overlap(&g, 0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let g = two_layers(&[(0, 1), (1, 2)], &[(0, 1), (1, 2)], true);
        assert_eq!(layer_overlap(&g, 0, 1).unwrap(), 1.0);
        let g = two_layers(&[(0, 1)], &[(2, 3)], true);
        assert_eq!(layer_overlap(&g, 0, 1).unwrap(), 0.0);
        assert!(layer_overlap(&g, 0, 2).is_err());
    }

    #[test]
    fn direction_respected_only_when_directed() {
        let g = two_layers(&[(0, 1)], &[(1, 0)], true);
        assert_eq!(layer_overlap(&g, 0, 1).unwrap(), 0.0);
        let g = two_layers(&[(0, 1)], &[(1, 0)], false);
        assert_eq!(layer_overlap(&g, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn star_and_cycle_degrees() {
        let g = two_layers(&[(0, 1), (0, 2), (0, 3), (0, 4)], &[(0, 1), (1, 2), (2, 0)], true);
        let out = degree_distribution(&g, 0, DegreeMode::Out).unwrap();
        assert_eq!(out, BTreeMap::from([(0, 4), (4, 1)]));
        let cyc_in = degree_distribution(&g, 1, DegreeMode::In).unwrap();
        assert_eq!(cyc_in, BTreeMap::from([(0, 2), (1, 3)]));
    }

    #[test]
    fn empty_and_undirected_modes() {
        let g = two_layers(&[], &[(0, 1)], false);
        assert_eq!(
            degree_distribution(&g, 0, DegreeMode::Total).unwrap(),
            BTreeMap::from([(0, 5)])
        );
        assert!(matches!(
            degree_distribution(&g, 1, DegreeMode::In),
            Err(Error::Mode(_))
        ));
    }
}
