use super::scheme::{BinScheme, LayerRelation};
use crate::error::Result;
use crate::graphstore::{MultilayerGraph, NodeId};

/// Bin of every materialized (target, source) pair.
///
/// A pair is materialized when the two nodes share an edge in at least one of
/// the scheme's layers. All other pairs implicitly hold
/// [`BinAssignment::no_edge_bin`], or no bin when that is `None`; they are
/// never stored.
#[derive(Debug, Clone)]
pub struct BinAssignment {
    node_count: usize,
    layers: Vec<usize>,
    bin_count: usize,
    no_edge_bin: Option<u32>,
    offsets: Vec<usize>,
    sources: Vec<NodeId>,
    bins: Vec<u32>,
}

/// Materialized sources of one target node with their bins, sources ascending.
#[derive(Debug, Clone, Copy)]
pub struct AssignmentRow<'a> {
    pub sources: &'a [NodeId],
    pub bins: &'a [u32],
}

impl<'a> AssignmentRow<'a> {
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + 'a {
        self.sources.iter().copied().zip(self.bins.iter().map(|&b| b as usize))
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}

impl BinAssignment {
    /// Assignment from explicit rows; each row's sources must be ascending.
    pub(crate) fn from_rows(
        node_count: usize,
        layers: Vec<usize>,
        bin_count: usize,
        no_edge_bin: Option<u32>,
        rows: impl IntoIterator<Item = Vec<(NodeId, u32)>>,
    ) -> Self {
        let mut offsets = vec![0];
        let mut sources = Vec::new();
        let mut bins = Vec::new();
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (s, b) in row {
                sources.push(s);
                bins.push(b);
            }
            offsets.push(sources.len());
        }
        debug_assert_eq!(offsets.len(), node_count + 1);
        BinAssignment {
            node_count,
            layers,
            bin_count,
            no_edge_bin,
            offsets,
            sources,
            bins,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    /// Layers the pairs were binned over.
    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn no_edge_bin(&self) -> Option<usize> {
        self.no_edge_bin.map(|b| b as usize)
    }

    pub fn row(&self, target: NodeId) -> AssignmentRow<'_> {
        let (lo, hi) = (self.offsets[target as usize], self.offsets[target as usize + 1]);
        AssignmentRow {
            sources: &self.sources[lo..hi],
            bins: &self.bins[lo..hi],
        }
    }

    /// Bin of the pair (target, source), including the implicit no-edge bin.
    pub fn bin_of(&self, target: NodeId, source: NodeId) -> Option<usize> {
        let row = self.row(target);
        match row.sources.binary_search(&source) {
            Ok(i) => Some(row.bins[i] as usize),
            Err(_) => self.no_edge_bin(),
        }
    }

    pub fn materialized_count(&self) -> usize {
        self.sources.len()
    }

    /// Number of ordered pairs (target, source) in each bin, over all `N^2`
    /// pairs when a no-edge bin exists and over materialized pairs otherwise.
    pub fn populations(&self) -> Vec<u64> {
        let mut pop = vec![0u64; self.bin_count];
        for &b in &self.bins {
            pop[b as usize] += 1;
        }
        if let Some(ne) = self.no_edge_bin {
            let n = self.node_count as u64;
            pop[ne as usize] += n * n - self.sources.len() as u64;
        }
        pop
    }
}

/// Bins every pair of nodes adjacent in at least one of the scheme's layers.
pub fn build_assignment(g: &MultilayerGraph, scheme: &BinScheme) -> Result<BinAssignment> {
    scheme.validate(g)?;
    let children = scheme.children();
    let layers: Vec<_> = children.iter().map(|c| g.layer(c.layer)).collect::<Result<_>>()?;
    let n = g.node_count();

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut sources = Vec::new();
    let mut bins = Vec::new();

    // (source, layer position, is_out, weight)
    let mut scratch: Vec<(NodeId, usize, bool, f64)> = Vec::new();
    let mut relations = vec![LayerRelation::default(); layers.len()];
    for u in 0..n as NodeId {
        scratch.clear();
        for (pos, layer) in layers.iter().enumerate() {
            scratch.extend(layer.out_neighbors(u).iter().map(|(v, w)| (v, pos, true, w)));
            if layer.is_directed() {
                scratch.extend(layer.in_neighbors(u).iter().map(|(v, w)| (v, pos, false, w)));
            }
        }
        scratch.sort_unstable_by_key(|e| e.0);

        let mut start = 0;
        while start < scratch.len() {
            let source = scratch[start].0;
            let mut end = start;
            for (rel, layer) in relations.iter_mut().zip(&layers) {
                *rel = LayerRelation {
                    out: None,
                    inc: None,
                    undirected: !layer.is_directed(),
                };
            }
            while end < scratch.len() && scratch[end].0 == source {
                let (_, pos, is_out, w) = scratch[end];
                let rel = &mut relations[pos];
                if rel.undirected {
                    rel.out = Some(w);
                    rel.inc = Some(w);
                } else if is_out {
                    rel.out = Some(w);
                } else {
                    rel.inc = Some(w);
                }
                end += 1;
            }
            if let Some(b) = scheme.bin_for(&relations) {
                sources.push(source);
                bins.push(b as u32);
            }
            start = end;
        }
        offsets.push(sources.len());
    }

    Ok(BinAssignment {
        node_count: n,
        layers: scheme.layer_ids(),
        bin_count: scheme.bin_count(),
        no_edge_bin: scheme.no_edge_bin().map(|b| b as u32),
        offsets,
        sources,
        bins,
    })
}
