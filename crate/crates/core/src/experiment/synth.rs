use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphstore::{GraphBuilder, Label, MultilayerGraph, NodeId, NodeLabels};

/// Parameters of a planted-homophily multiplex graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub nodes: usize,
    #[serde(default = "one")]
    pub layers: usize,
    /// Expected number of edges per node in each layer (counting both
    /// endpoints for undirected layers).
    pub mean_degree: f64,
    /// Target pairwise Jaccard overlap of the layers' edge sets.
    #[serde(default)]
    pub overlap: f64,
    /// Label assortativity of edges: 0.5 wires endpoints uniformly at
    /// random, 1 only joins equal labels, 0 only joins different labels.
    pub homophily: f64,
    pub base_rate: f64,
    #[serde(default)]
    pub directed: bool,
    /// Probability that a directed edge also gets its reverse.
    #[serde(default)]
    pub reciprocity: f64,
    /// Added to the weight of same-label edges; weights are otherwise
    /// uniform integers in 1..=4.
    #[serde(default)]
    pub weight_contrast: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl SyntheticSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SyntheticSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("overlap", self.overlap),
            ("homophily", self.homophily),
            ("base_rate", self.base_rate),
            ("reciprocity", self.reciprocity),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.nodes < 4 || self.layers == 0 {
            return Err(Error::Config(
                "synthetic graphs need at least 4 nodes and 1 layer".into(),
            ));
        }
        if !(self.mean_degree.is_finite() && self.mean_degree >= 0.0) || !self.weight_contrast.is_finite() {
            return Err(Error::Config(
                "mean_degree and weight_contrast must be finite and nonnegative".into(),
            ));
        }
        if self.base_rate <= 0.0 || self.base_rate >= 1.0 {
            return Err(Error::Config("base_rate must lie strictly between 0 and 1".into()));
        }
        Ok(())
    }
}

/// Samples a graph and one binary label task.
///
/// Every layer holds `m` edges: a core shared by all layers plus edges unique
/// to the layer, sized so that any two layers have Jaccard overlap equal to
/// the target. Each edge starts at a uniform node `u`. For `homophily = h >=
/// 0.5` it ends, with probability `2h - 1`, at a uniform node labeled like
/// `u` and otherwise at a uniform node; below 0.5 the biased draw targets the
/// other label with probability `1 - 2h`. Expected degrees then do not depend
/// on the label when `h >= 0.5`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(MultilayerGraph, NodeLabels)> {
    spec.validate()?;
    let n = spec.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<Label> = (0..n)
        .map(|_| Label::from_bool(rng.gen::<f64>() < spec.base_rate))
        .collect();
    if labels.iter().all(|l| l.is_pos()) || labels.iter().all(|l| !l.is_pos()) {
        labels[0] = labels[0].flipped();
    }
    let pos: Vec<NodeId> = (0..n as NodeId).filter(|&v| labels[v as usize].is_pos()).collect();
    let neg: Vec<NodeId> = (0..n as NodeId).filter(|&v| !labels[v as usize].is_pos()).collect();

    let per_node = if spec.directed { 1.0 } else { 0.5 };
    let m = (n as f64 * spec.mean_degree * per_node).round() as usize;
    let core = if spec.overlap >= 1.0 {
        m
    } else {
        (2.0 * m as f64 * spec.overlap / (1.0 + spec.overlap)).round() as usize
    };
    let total = core + spec.layers * (m - core);
    let possible = if spec.directed { n * (n - 1) } else { n * (n - 1) / 2 };
    if total > possible / 2 {
        return Err(Error::Config(format!(
            "{total} distinct edges requested but the graph only has {possible} node pairs; lower mean_degree or overlap demand"
        )));
    }

    let mut used: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(total);
    let draw = |rng: &mut ChaCha8Rng, used: &mut HashSet<(NodeId, NodeId)>| -> (NodeId, NodeId, f64) {
        loop {
            let u = rng.gen_range(0..n as NodeId);
            let bias = (2.0 * spec.homophily - 1.0).abs();
            let v = if rng.gen::<f64>() < bias {
                let same = spec.homophily >= 0.5;
                let pool = if labels[u as usize].is_pos() == same {
                    &pos
                } else {
                    &neg
                };
                pool[rng.gen_range(0..pool.len())]
            } else {
                rng.gen_range(0..n as NodeId)
            };
            if u == v {
                continue;
            }
            let key = if spec.directed || u < v { (u, v) } else { (v, u) };
            if !used.insert(key) {
                continue;
            }
            let mut w = rng.gen_range(1..=4) as f64;
            if labels[u as usize] == labels[v as usize] {
                w += spec.weight_contrast;
            }
            return (key.0, key.1, w);
        }
    };

    let mut b = GraphBuilder::new(n);
    for _ in 0..spec.layers {
        b.add_layer(spec.directed);
    }
    let emit = |b: &mut GraphBuilder,
                layer: usize,
                rng: &mut ChaCha8Rng,
                used: &mut HashSet<(NodeId, NodeId)>,
                count: usize|
     -> Result<Vec<(NodeId, NodeId, f64)>> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let (s, t, w) = draw(rng, used);
            out.push((s, t, w));
            if spec.directed && out.len() < count && rng.gen::<f64>() < spec.reciprocity && used.insert((t, s)) {
                out.push((t, s, w));
            }
        }
        for &(s, t, w) in &out {
            b.add_edge(layer, s, t, w)?;
        }
        Ok(out)
    };
    let shared = emit(&mut b, 0, &mut rng, &mut used, core)?;
    for k in 1..spec.layers {
        for &(s, t, w) in &shared {
            b.add_edge(k, s, t, w)?;
        }
    }
    for k in 0..spec.layers {
        emit(&mut b, k, &mut rng, &mut used, m - core)?;
    }
    let graph = b.build()?;
    let task: Vec<Option<Label>> = labels.into_iter().map(Some).collect();
    let node_labels = NodeLabels::from_tasks(n, vec![task])?;
    Ok((graph, node_labels))
}
