use crate::error::{Error, Result};

/// Dense node identifier in `[0, N)`.
pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
}

/// Row-compressed adjacency: neighbors of each node sorted ascending.
#[derive(Debug, Clone, Default)]
struct Csr {
    offsets: Vec<usize>,
    nodes: Vec<NodeId>,
    weights: Vec<f64>,
}

impl Csr {
    /// `entries` must be sorted by (row, column) with no duplicates.
    fn from_sorted(node_count: usize, entries: &[(NodeId, NodeId, f64)]) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(row, _, _) in entries {
            offsets[row as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        Csr {
            offsets,
            nodes: entries.iter().map(|e| e.1).collect(),
            weights: entries.iter().map(|e| e.2).collect(),
        }
    }

    fn row(&self, u: NodeId) -> Neighbors<'_> {
        let (lo, hi) = (self.offsets[u as usize], self.offsets[u as usize + 1]);
        Neighbors {
            nodes: &self.nodes[lo..hi],
            weights: &self.weights[lo..hi],
        }
    }
}

/// Borrowed neighbor list of one node within one layer.
#[derive(Debug, Clone, Copy)]
pub struct Neighbors<'a> {
    pub nodes: &'a [NodeId],
    pub weights: &'a [f64],
}

impl<'a> Neighbors<'a> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + 'a {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Weight of the edge to `v`, if present.
    pub fn weight_to(&self, v: NodeId) -> Option<f64> {
        self.nodes.binary_search(&v).ok().map(|i| self.weights[i])
    }
}

/// One edge type of a multiplex graph.
///
/// Directed layers keep forward and reverse adjacency so both out- and
/// in-neighbors are available in O(degree). Undirected layers keep a single
/// symmetric adjacency and report it for both directions.
#[derive(Debug, Clone)]
pub struct Layer {
    id: usize,
    directed: bool,
    edge_count: usize,
    out: Csr,
    inc: Csr,
}

impl Layer {
    /// Builds a layer from raw edges. Duplicate pairs are merged by summing
    /// their weights; undirected edges are canonicalized to `source < target`
    /// first, so `(a, b)` and `(b, a)` are the same edge.
    pub fn from_edges(
        id: usize,
        directed: bool,
        node_count: usize,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut raw: Vec<(NodeId, NodeId, f64)> = Vec::new();
        for e in edges {
            validate_edge(&e, node_count)?;
            let (s, t) = if directed || e.source < e.target {
                (e.source, e.target)
            } else {
                (e.target, e.source)
            };
            raw.push((s, t, e.weight));
        }
        raw.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(raw.len());
        for (s, t, w) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == s && last.1 == t => last.2 += w,
                _ => merged.push((s, t, w)),
            }
        }
        let edge_count = merged.len();

        let (out, inc) = if directed {
            let out = Csr::from_sorted(node_count, &merged);
            let mut rev: Vec<_> = merged.iter().map(|&(s, t, w)| (t, s, w)).collect();
            rev.sort_by_key(|a| (a.0, a.1));
            (out, Csr::from_sorted(node_count, &rev))
        } else {
            let mut sym = Vec::with_capacity(merged.len() * 2);
            for &(s, t, w) in &merged {
                sym.push((s, t, w));
                sym.push((t, s, w));
            }
            drop(merged);
            sym.sort_by_key(|a| (a.0, a.1));
            (Csr::from_sorted(node_count, &sym), Csr::default())
        };

        Ok(Layer {
            id,
            directed,
            edge_count,
            out,
            inc,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Nodes `v` with an edge `u -> v` (all neighbors for undirected layers).
    pub fn out_neighbors(&self, u: NodeId) -> Neighbors<'_> {
        self.out.row(u)
    }

    /// Nodes `v` with an edge `v -> u` (all neighbors for undirected layers).
    pub fn in_neighbors(&self, u: NodeId) -> Neighbors<'_> {
        if self.directed {
            self.inc.row(u)
        } else {
            self.out.row(u)
        }
    }

    /// Weight of `u -> v`; for undirected layers the weight of `{u, v}`.
    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.out.row(u).weight_to(v)
    }

    /// Edges in canonical order: sorted by (source, target), undirected edges
    /// listed once with `source < target`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.out.offsets.len().saturating_sub(1);
        let directed = self.directed;
        (0..n as NodeId).flat_map(move |u| {
            self.out
                .row(u)
                .iter()
                .filter(move |&(v, _)| directed || u < v)
                .map(move |(v, w)| Edge {
                    source: u,
                    target: v,
                    weight: w,
                })
        })
    }
}

fn validate_edge(e: &Edge, node_count: usize) -> Result<()> {
    for v in [e.source, e.target] {
        if v as usize >= node_count {
            return Err(Error::Range {
                what: "node id",
                value: v as usize,
                limit: node_count,
            });
        }
    }
    if e.source == e.target {
        return Err(Error::Value(format!("self-loop on node {}", e.source)));
    }
    if !e.weight.is_finite() || e.weight < 0.0 {
        return Err(Error::Value(format!(
            "edge ({}, {}) has invalid weight {}",
            e.source, e.target, e.weight
        )));
    }
    Ok(())
}

/// Immutable multiplex graph: `K >= 1` layers over one shared node set.
#[derive(Debug, Clone)]
pub struct MultilayerGraph {
    node_count: usize,
    layers: Vec<Layer>,
}

impl MultilayerGraph {
    pub fn new(node_count: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Value("a graph needs at least one layer".into()));
        }
        if node_count > NodeId::MAX as usize {
            return Err(Error::Range {
                what: "node count",
                value: node_count,
                limit: NodeId::MAX as usize,
            });
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.id != k || layer.out.offsets.len() != node_count + 1 {
                return Err(Error::Value(format!(
                    "layer {} does not match position {k} or node count {node_count}",
                    layer.id
                )));
            }
        }
        Ok(MultilayerGraph { node_count, layers })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, k: usize) -> Result<&Layer> {
        self.layers.get(k).ok_or(Error::Range {
            what: "layer id",
            value: k,
            limit: self.layers.len(),
        })
    }

    pub fn edge_count(&self) -> usize {
        self.layers.iter().map(Layer::edge_count).sum()
    }

    /// Sorted, deduplicated nodes adjacent to `u` in any direction in any of
    /// `layers`.
    pub fn union_neighbors(&self, u: NodeId, layers: &[usize]) -> Vec<NodeId> {
        let mut out = Vec::new();
        for &k in layers {
            let layer = &self.layers[k];
            out.extend_from_slice(layer.out_neighbors(u).nodes);
            if layer.directed {
                out.extend_from_slice(layer.in_neighbors(u).nodes);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn all_layer_ids(&self) -> Vec<usize> {
        (0..self.layers.len()).collect()
    }
}

/// Incremental construction of a [`MultilayerGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    node_count: usize,
    layers: Vec<(bool, Vec<Edge>)>,
}

impl GraphBuilder {
    pub fn new(node_count: usize) -> Self {
        GraphBuilder {
            node_count,
            layers: Vec::new(),
        }
    }

    pub fn add_layer(&mut self, directed: bool) -> usize {
        self.layers.push((directed, Vec::new()));
        self.layers.len() - 1
    }

    pub fn add_edge(&mut self, layer: usize, source: NodeId, target: NodeId, weight: f64) -> Result<()> {
        let edge = Edge { source, target, weight };
        validate_edge(&edge, self.node_count)?;
        let limit = self.layers.len();
        let (_, edges) = self.layers.get_mut(layer).ok_or(Error::Range {
            what: "layer id",
            value: layer,
            limit,
        })?;
        edges.push(edge);
        Ok(())
    }

    pub fn build(self) -> Result<MultilayerGraph> {
        let n = self.node_count;
        let layers = self
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, (directed, edges))| Layer::from_edges(k, directed, n, edges))
            .collect::<Result<Vec<_>>>()?;
        MultilayerGraph::new(n, layers)
    }
}
