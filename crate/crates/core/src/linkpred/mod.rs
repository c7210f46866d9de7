//! Link prediction: a candidate pair `(z1, z2)` is described by how every
//! node relates to both endpoints, and scored with per-bin Naive Bayes
//! counts over labeled training pairs.

mod sample;

pub use sample::{load_pairs, read_pairs, sample_link_pairs, write_pairs, LinkSplit, LinkSplitOptions};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{build_assignment, AssignmentRow, BinAssignment, BinScheme};
use crate::calibrate::{fit, CalibratedModel, FitOptions};
use crate::error::{Error, Result};
use crate::graphstore::{Label, MultilayerGraph, NodeId};
use crate::nbcore::{binned_by_bin, BinCounts, BinCountsBuilder, BinScorer, FeatureMatrix, FeatureSpace};

/// A labeled candidate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairSample {
    pub z1: NodeId,
    pub z2: NodeId,
    pub label: Label,
}

/// Joint bin of the plain neighbor indicators: `2 * [i ~ z1] + [i ~ z2]`.
pub fn pair_bin(neighbor_of_z1: bool, neighbor_of_z2: bool) -> usize {
    2 * neighbor_of_z1 as usize + neighbor_of_z2 as usize
}

/// Joint bin of two per-endpoint bins out of `per_endpoint` each.
pub fn pair_bin_general(b1: usize, b2: usize, per_endpoint: usize) -> Result<usize> {
    for b in [b1, b2] {
        if b >= per_endpoint {
            return Err(Error::Range {
                what: "endpoint bin",
                value: b,
                limit: per_endpoint,
            });
        }
    }
    Ok(b1 * per_endpoint + b2)
}

/// How a node relates to a single endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointKind {
    /// Neighbor (any direction, any layer) or not.
    Adjacency,
    /// Any bin scheme that has a no-edge bin.
    Scheme(BinScheme),
}

/// Per-endpoint bins of every (endpoint, node) pair.
#[derive(Debug, Clone)]
pub struct EndpointBins {
    assignment: BinAssignment,
    names: Vec<String>,
    canonical: bool,
}

impl EndpointBins {
    /// `layers` is used by [`EndpointKind::Adjacency`]; a scheme carries its
    /// own layers.
    pub fn build(g: &MultilayerGraph, layers: &[usize], kind: &EndpointKind) -> Result<Self> {
        match kind {
            EndpointKind::Adjacency => {
                if layers.is_empty() {
                    return Err(Error::Config("link prediction needs at least one layer".into()));
                }
                for &k in layers {
                    g.layer(k)?;
                }
                let n = g.node_count();
                let rows = (0..n as NodeId).map(|u| {
                    let mut nbrs: Vec<NodeId> = Vec::new();
                    for &k in layers {
                        let layer = &g.layers()[k];
                        nbrs.extend_from_slice(layer.out_neighbors(u).nodes);
                        if layer.is_directed() {
                            nbrs.extend_from_slice(layer.in_neighbors(u).nodes);
                        }
                    }
                    nbrs.sort_unstable();
                    nbrs.dedup();
                    nbrs.into_iter().map(|v| (v, 1)).collect::<Vec<_>>()
                });
                let assignment = BinAssignment::from_rows(n, layers.to_vec(), 2, Some(0), rows);
                Ok(EndpointBins {
                    assignment,
                    names: vec!["no".into(), "nbr".into()],
                    canonical: layers.iter().all(|&k| !g.layers()[k].is_directed()),
                })
            }
            EndpointKind::Scheme(scheme) => {
                if scheme.no_edge_bin().is_none() {
                    return Err(Error::Scheme(
                        "link-prediction endpoint bins need a no-edge bin; disable existing-edges-only".into(),
                    ));
                }
                let assignment = build_assignment(g, scheme)?;
                let names = (0..scheme.bin_count()).map(|b| scheme.bin_label(b)).collect();
                let canonical = scheme.layer_ids().iter().all(|&k| !g.layers()[k].is_directed());
                Ok(EndpointBins {
                    assignment,
                    names,
                    canonical,
                })
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.node_count()
    }

    pub fn per_endpoint(&self) -> usize {
        self.assignment.bin_count()
    }

    pub fn joint_count(&self) -> usize {
        self.per_endpoint() * self.per_endpoint()
    }

    fn endpoint_none(&self) -> usize {
        self.assignment
            .no_edge_bin()
            .expect("endpoint bins always have a no-edge bin")
    }

    pub fn joint_no_edge(&self) -> usize {
        let z = self.endpoint_none();
        z * self.per_endpoint() + z
    }

    /// Bin of `(endpoint, i)`, including the no-edge bin.
    pub fn endpoint_bin(&self, endpoint: NodeId, i: NodeId) -> usize {
        self.assignment
            .bin_of(endpoint, i)
            .unwrap_or_else(|| self.endpoint_none())
    }

    /// Whether `(z1, z2)` and `(z2, z1)` are the same pair.
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn joint_label(&self, w: usize) -> String {
        let c = self.per_endpoint();
        format!("z1:{}&z2:{}", self.names[w / c], self.names[w % c])
    }

    fn space(&self) -> FeatureSpace {
        FeatureSpace::Named((0..self.joint_count()).map(|w| self.joint_label(w)).collect())
    }

    /// Nodes adjacent to either endpoint with their joint bins, ascending.
    fn joint_row(&self, z1: NodeId, z2: NodeId, sources: &mut Vec<NodeId>, bins: &mut Vec<u32>) {
        sources.clear();
        bins.clear();
        let (r1, r2) = (self.assignment.row(z1), self.assignment.row(z2));
        let c = self.per_endpoint();
        let z = self.endpoint_none();
        let (mut a, mut b) = (0, 0);
        while a < r1.len() || b < r2.len() {
            let s1 = r1.sources.get(a).copied().unwrap_or(NodeId::MAX);
            let s2 = r2.sources.get(b).copied().unwrap_or(NodeId::MAX);
            let (i, b1, b2) = if s1 == s2 {
                a += 1;
                b += 1;
                (s1, r1.bins[a - 1] as usize, r2.bins[b - 1] as usize)
            } else if s1 < s2 {
                a += 1;
                (s1, r1.bins[a - 1] as usize, z)
            } else {
                b += 1;
                (s2, z, r2.bins[b - 1] as usize)
            };
            sources.push(i);
            bins.push((b1 * c + b2) as u32);
        }
    }

    fn check_pair(&self, z1: NodeId, z2: NodeId) -> Result<(NodeId, NodeId)> {
        let n = self.node_count();
        for z in [z1, z2] {
            if z as usize >= n {
                return Err(Error::Range {
                    what: "pair endpoint",
                    value: z as usize,
                    limit: n,
                });
            }
        }
        if z1 == z2 {
            return Err(Error::Value(format!("self-pair ({z1}, {z1}) is not a valid candidate")));
        }
        Ok(if self.canonical && z2 < z1 { (z2, z1) } else { (z1, z2) })
    }
}

/// Per-node, per-joint-bin counts of labeled training pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCounts {
    counts: BinCounts,
}

impl PairCounts {
    pub fn accumulate(endpoints: &EndpointBins, train: &[PairSample]) -> Result<Self> {
        let n = endpoints.node_count();
        let mut triples: Vec<(NodeId, u32, Label)> = Vec::new();
        let (mut sources, mut bins) = (Vec::new(), Vec::new());
        let (mut n_plus, mut n_minus) = (0u64, 0u64);
        for p in train {
            let (z1, z2) = endpoints.check_pair(p.z1, p.z2)?;
            if p.label.is_pos() {
                n_plus += 1;
            } else {
                n_minus += 1;
            }
            endpoints.joint_row(z1, z2, &mut sources, &mut bins);
            triples.extend(sources.iter().zip(&bins).map(|(&i, &w)| (i, w, p.label)));
        }
        triples.sort_by_key(|t| t.0);
        let mut builder = BinCountsBuilder::new(
            n,
            endpoints.joint_count(),
            Some(endpoints.joint_no_edge()),
            n_plus,
            n_minus,
        );
        let mut obs = Vec::new();
        let mut pos = 0;
        for i in 0..n as NodeId {
            obs.clear();
            while pos < triples.len() && triples[pos].0 == i {
                obs.push((triples[pos].1, triples[pos].2));
                pos += 1;
            }
            builder.push_node(&mut obs);
        }
        Ok(PairCounts {
            counts: builder.finish(),
        })
    }

    pub fn n_plus(&self) -> u64 {
        self.counts.n_plus
    }

    pub fn n_minus(&self) -> u64 {
        self.counts.n_minus
    }

    /// `(d_{i,+1,w}, d_{i,-1,w})` over training pairs.
    pub fn get(&self, i: NodeId, w: usize) -> (u64, u64) {
        self.counts.get(i, w)
    }
}

/// Feature rows for candidate pairs: entry `w` sums, over nodes `i` whose
/// joint bin is `w`, the one-hop score of `i` within `w`.
pub fn pair_features(
    counts: &PairCounts,
    endpoints: &EndpointBins,
    pairs: &[(NodeId, NodeId)],
) -> Result<FeatureMatrix> {
    if counts.counts.bin_count() != endpoints.joint_count() || counts.counts.node_count() != endpoints.node_count() {
        return Err(Error::Dimension {
            expected: endpoints.joint_count(),
            actual: counts.counts.bin_count(),
        });
    }
    let checked = pairs
        .iter()
        .map(|&(a, b)| endpoints.check_pair(a, b))
        .collect::<Result<Vec<_>>>()?;
    let scorer = BinScorer::new(&counts.counts);
    let z_total = scorer.total_for(endpoints.joint_no_edge());
    let rows: Vec<Vec<(u32, f64)>> = checked
        .par_iter()
        .map(|&(z1, z2)| {
            let (mut sources, mut bins) = (Vec::new(), Vec::new());
            endpoints.joint_row(z1, z2, &mut sources, &mut bins);
            let mut out = Vec::new();
            let row = AssignmentRow {
                sources: &sources,
                bins: &bins,
            };
            binned_by_bin(row, &scorer, z_total, 0, &mut out);
            out
        })
        .collect();
    let nodes = (0..pairs.len() as NodeId).collect();
    FeatureMatrix::from_rows(endpoints.space(), nodes, rows)
}

/// Fitted link model with its test-pair probabilities.
#[derive(Debug, Clone)]
pub struct LinkPrediction {
    pub model: CalibratedModel,
    pub test_probs: Vec<f64>,
}

fn endpoints_of(pairs: &[PairSample]) -> Vec<(NodeId, NodeId)> {
    pairs.iter().map(|p| (p.z1, p.z2)).collect()
}

/// Counts from training pairs, calibration on validation pairs, prediction
/// on test pairs.
pub fn linkpred_fit_predict(
    endpoints: &EndpointBins,
    train: &[PairSample],
    valid: &[PairSample],
    test: &[PairSample],
    opts: &FitOptions,
) -> Result<LinkPrediction> {
    let counts = PairCounts::accumulate(endpoints, train).map_err(|e| e.at_stage("pair counts"))?;
    let xv = pair_features(&counts, endpoints, &endpoints_of(valid)).map_err(|e| e.at_stage("features"))?;
    let yv: Vec<Label> = valid.iter().map(|p| p.label).collect();
    let model = fit(&xv, &yv, opts).map_err(|e| e.at_stage("calibration"))?;
    let xt = pair_features(&counts, endpoints, &endpoints_of(test)).map_err(|e| e.at_stage("features"))?;
    let test_probs = model.predict(&xt).map_err(|e| e.at_stage("prediction"))?;
    Ok(LinkPrediction { model, test_probs })
}
