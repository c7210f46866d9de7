use crate::binning::BinAssignment;
use crate::error::{Error, Result};
use crate::graphstore::{Label, MultilayerGraph, NodeId, NodeLabels, Role, SplitAssignment};

/// Labels visible to count accumulation: the task's labels restricted to
/// train-role nodes. Everything downstream of counting only ever sees this.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLabels {
    labels: Vec<Option<Label>>,
    n_plus: u64,
    n_minus: u64,
}

impl TrainLabels {
    pub fn new(labels: &NodeLabels, split: &SplitAssignment, task: usize) -> Result<Self> {
        let task_labels = labels.task(task)?;
        if split.node_count() != labels.node_count() {
            return Err(Error::Dimension {
                expected: labels.node_count(),
                actual: split.node_count(),
            });
        }
        let filtered = task_labels
            .iter()
            .enumerate()
            .map(|(v, l)| l.filter(|_| split.role(v as NodeId) == Some(Role::Train)))
            .collect();
        Ok(Self::from_labels(filtered))
    }

    pub fn from_labels(labels: Vec<Option<Label>>) -> Self {
        let n_plus = labels.iter().filter(|l| **l == Some(Label::Pos)).count() as u64;
        let n_minus = labels.iter().filter(|l| **l == Some(Label::Neg)).count() as u64;
        TrainLabels {
            labels,
            n_plus,
            n_minus,
        }
    }

    pub fn get(&self, v: NodeId) -> Option<Label> {
        self.labels[v as usize]
    }

    pub fn n_plus(&self) -> u64 {
        self.n_plus
    }

    pub fn n_minus(&self) -> u64 {
        self.n_minus
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Fraction of positive training labels; `None` without any.
    pub fn base_rate(&self) -> Option<f64> {
        let n = self.n_plus + self.n_minus;
        (n > 0).then(|| self.n_plus as f64 / n as f64)
    }
}

/// Unbinned counts `d_{i,+1}`, `d_{i,-1}`: training-labeled nodes adjacent
/// to `i` in any direction in the given layers.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeCounts {
    pub n_plus: u64,
    pub n_minus: u64,
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
}

impl DegreeCounts {
    pub fn accumulate(g: &MultilayerGraph, layers: &[usize], train: &TrainLabels) -> Result<Self> {
        for &k in layers {
            g.layer(k)?;
        }
        let n = g.node_count();
        let mut plus = vec![0u64; n];
        let mut minus = vec![0u64; n];
        let mut nbrs = Vec::new();
        for i in 0..n as NodeId {
            nbrs.clear();
            for &k in layers {
                let layer = &g.layers()[k];
                nbrs.extend_from_slice(layer.out_neighbors(i).nodes);
                if layer.is_directed() {
                    nbrs.extend_from_slice(layer.in_neighbors(i).nodes);
                }
            }
            nbrs.sort_unstable();
            nbrs.dedup();
            for &s in &nbrs {
                match train.get(s) {
                    Some(Label::Pos) => plus[i as usize] += 1,
                    Some(Label::Neg) => minus[i as usize] += 1,
                    None => {}
                }
            }
        }
        Ok(DegreeCounts {
            n_plus: train.n_plus(),
            n_minus: train.n_minus(),
            plus,
            minus,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BinEntry {
    bin: u32,
    plus: u64,
    minus: u64,
}

/// Binned counts `d_{i,+1,w}`, `d_{i,-1,w}`.
///
/// Only bins holding materialized labeled pairs are stored. The no-edge bin,
/// when present, is completed on lookup from the label totals:
/// `d_{i,y,none} = n_y - sum of materialized d_{i,y,w}` plus any materialized
/// pairs that fall in that bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCounts {
    pub n_plus: u64,
    pub n_minus: u64,
    bin_count: usize,
    no_edge_bin: Option<usize>,
    offsets: Vec<usize>,
    entries: Vec<BinEntry>,
    mat_plus: Vec<u64>,
    mat_minus: Vec<u64>,
}

impl BinCounts {
    pub fn accumulate(bins: &BinAssignment, train: &TrainLabels) -> Result<Self> {
        if bins.node_count() != train.node_count() {
            return Err(Error::Dimension {
                expected: bins.node_count(),
                actual: train.node_count(),
            });
        }
        let n = bins.node_count();
        let mut builder =
            BinCountsBuilder::new(n, bins.bin_count(), bins.no_edge_bin(), train.n_plus(), train.n_minus());
        let mut scratch: Vec<(u32, Label)> = Vec::new();
        for i in 0..n as NodeId {
            scratch.clear();
            for (s, w) in bins.row(i).iter() {
                if let Some(l) = train.get(s) {
                    scratch.push((w as u32, l));
                }
            }
            builder.push_node(&mut scratch);
        }
        Ok(builder.finish())
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn no_edge_bin(&self) -> Option<usize> {
        self.no_edge_bin
    }

    pub fn node_count(&self) -> usize {
        self.mat_plus.len()
    }

    fn stored(&self, i: NodeId) -> &[BinEntry] {
        &self.entries[self.offsets[i as usize]..self.offsets[i as usize + 1]]
    }

    /// `(d_{i,+1,w}, d_{i,-1,w})`.
    pub fn get(&self, i: NodeId, w: usize) -> (u64, u64) {
        let stored = self.stored(i);
        let (mut p, mut m) = match stored.binary_search_by_key(&(w as u32), |e| e.bin) {
            Ok(idx) => (stored[idx].plus, stored[idx].minus),
            Err(_) => (0, 0),
        };
        if self.no_edge_bin == Some(w) {
            p += self.n_plus - self.mat_plus[i as usize];
            m += self.n_minus - self.mat_minus[i as usize];
        }
        (p, m)
    }

    /// Bins with a nonzero stored count for node `i` (no-edge completion
    /// excluded), ascending.
    pub fn stored_bins(&self, i: NodeId) -> impl Iterator<Item = (usize, u64, u64)> + '_ {
        self.stored(i).iter().map(|e| (e.bin as usize, e.plus, e.minus))
    }

    /// `sum_w d_{i,+1,w}` and `sum_w d_{i,-1,w}` over all bins.
    pub fn totals(&self, i: NodeId) -> (u64, u64) {
        if self.no_edge_bin.is_some() {
            (self.n_plus, self.n_minus)
        } else {
            (self.mat_plus[i as usize], self.mat_minus[i as usize])
        }
    }
}

/// Fills [`BinCounts`] node by node, in ascending node order.
pub(crate) struct BinCountsBuilder {
    counts: BinCounts,
}

impl BinCountsBuilder {
    pub fn new(node_count: usize, bin_count: usize, no_edge_bin: Option<usize>, n_plus: u64, n_minus: u64) -> Self {
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        BinCountsBuilder {
            counts: BinCounts {
                n_plus,
                n_minus,
                bin_count,
                no_edge_bin,
                offsets,
                entries: Vec::new(),
                mat_plus: Vec::with_capacity(node_count),
                mat_minus: Vec::with_capacity(node_count),
            },
        }
    }

    /// Appends the next node's materialized `(bin, label)` observations.
    /// Sorts `obs` in place.
    pub fn push_node(&mut self, obs: &mut [(u32, Label)]) {
        let c = &mut self.counts;
        obs.sort_unstable_by_key(|e| e.0);
        let start = c.entries.len();
        let (mut mp, mut mm) = (0, 0);
        for &(w, l) in obs.iter() {
            if c.entries.len() == start || c.entries.last().map(|e| e.bin) != Some(w) {
                c.entries.push(BinEntry {
                    bin: w,
                    plus: 0,
                    minus: 0,
                });
            }
            let e = c.entries.last_mut().unwrap();
            if l.is_pos() {
                e.plus += 1;
                mp += 1;
            } else {
                e.minus += 1;
                mm += 1;
            }
        }
        c.offsets.push(c.entries.len());
        c.mat_plus.push(mp);
        c.mat_minus.push(mm);
    }

    pub fn finish(self) -> BinCounts {
        self.counts
    }
}

/// All count statistics for one task on one bin assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct NbCounts {
    pub degrees: DegreeCounts,
    pub bins: BinCounts,
}

impl NbCounts {
    pub fn n_plus(&self) -> u64 {
        self.bins.n_plus
    }

    pub fn n_minus(&self) -> u64 {
        self.bins.n_minus
    }
}

/// Counts labeled training neighbors per node and per bin in one pass over
/// the materialized pairs. Only train-role labels of `task` are read.
pub fn accumulate_counts(
    g: &MultilayerGraph,
    bins: &BinAssignment,
    labels: &NodeLabels,
    split: &SplitAssignment,
    task: usize,
) -> Result<NbCounts> {
    let train = TrainLabels::new(labels, split, task)?;
    accumulate_counts_from(g, bins, &train)
}

pub fn accumulate_counts_from(g: &MultilayerGraph, bins: &BinAssignment, train: &TrainLabels) -> Result<NbCounts> {
    if g.node_count() != train.node_count() {
        return Err(Error::Dimension {
            expected: g.node_count(),
            actual: train.node_count(),
        });
    }
    Ok(NbCounts {
        degrees: DegreeCounts::accumulate(g, bins.layers(), train)?,
        bins: BinCounts::accumulate(bins, train)?,
    })
}
