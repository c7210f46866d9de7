use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::{BinCounts, DegreeCounts, NbCounts};
use super::scores::{onehop_score_baseline, onehop_score_binned};
use crate::binning::{AssignmentRow, BinAssignment, BinScheme};
use crate::error::{Error, Result};
use crate::graphstore::NodeId;

/// What each feature column means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureSpace {
    /// One two-hop sum over all neighbors.
    Scalar,
    /// One column per bin.
    Bins(BinScheme),
    /// Column `w * |W| + w'`: two-hop bin `w`, one-hop bin `w'`.
    BinPairs(BinScheme),
    /// Per-layer bin blocks, concatenated in layer order.
    LayerBlocks(Vec<BinScheme>),
    /// Column `k * |W| + w`: layer `k`'s one-hop score in product bin `w`.
    LayerByBin {
        layers: Vec<usize>,
        scheme: BinScheme,
    },
    Named(Vec<String>),
}

impl FeatureSpace {
    pub fn dim(&self) -> usize {
        match self {
            FeatureSpace::Scalar => 1,
            FeatureSpace::Bins(s) => s.bin_count(),
            FeatureSpace::BinPairs(s) => s.bin_count() * s.bin_count(),
            FeatureSpace::LayerBlocks(v) => v.iter().map(BinScheme::bin_count).sum(),
            FeatureSpace::LayerByBin { layers, scheme } => layers.len() * scheme.bin_count(),
            FeatureSpace::Named(names) => names.len(),
        }
    }

    pub fn label(&self, col: usize) -> String {
        match self {
            FeatureSpace::Scalar => "neighbors".to_string(),
            FeatureSpace::Bins(s) => s.bin_label(col),
            FeatureSpace::BinPairs(s) => {
                let w = s.bin_count();
                format!("{}=>{}", s.bin_label(col / w), s.bin_label(col % w))
            }
            FeatureSpace::LayerBlocks(v) => {
                let mut rest = col;
                for s in v {
                    if rest < s.bin_count() {
                        return format!("L{}:{}", s.layer_ids()[0], s.bin_label(rest));
                    }
                    rest -= s.bin_count();
                }
                format!("#{col}")
            }
            FeatureSpace::LayerByBin { layers, scheme } => {
                let w = scheme.bin_count();
                format!("score@L{}:{}", layers[col / w], scheme.bin_label(col % w))
            }
            FeatureSpace::Named(names) => names[col].clone(),
        }
    }
}

/// Sparse row-major feature matrix, one row per target node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    space: FeatureSpace,
    nodes: Vec<NodeId>,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

/// One sparse row: ascending column indices with their nonzero values.
#[derive(Debug, Clone, Copy)]
pub struct FeatureRow<'a> {
    pub cols: &'a [u32],
    pub vals: &'a [f64],
}

impl<'a> FeatureRow<'a> {
    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.cols
            .iter()
            .zip(self.vals)
            .map(|(&c, &v)| weights[c as usize] * v)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.cols.iter().map(|&c| c as usize).zip(self.vals.iter().copied())
    }
}

impl FeatureMatrix {
    /// Builds a matrix from per-row `(column, value)` lists. Entries are
    /// sorted, duplicate columns summed and exact zeros dropped.
    pub fn from_rows(space: FeatureSpace, nodes: Vec<NodeId>, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        if nodes.len() != rows.len() {
            return Err(Error::Dimension {
                expected: nodes.len(),
                actual: rows.len(),
            });
        }
        let dim = space.dim();
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let start = cols.len();
            for (c, v) in row {
                if c as usize >= dim {
                    return Err(Error::Range {
                        what: "feature column",
                        value: c as usize,
                        limit: dim,
                    });
                }
                if !v.is_finite() {
                    return Err(Error::Numeric(format!("non-finite feature value in column {c}")));
                }
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            let mut keep = start;
            for idx in start..cols.len() {
                if vals[idx] != 0.0 {
                    cols[keep] = cols[idx];
                    vals[keep] = vals[idx];
                    keep += 1;
                }
            }
            cols.truncate(keep);
            vals.truncate(keep);
            offsets.push(cols.len());
        }
        Ok(FeatureMatrix {
            space,
            nodes,
            offsets,
            cols,
            vals,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn rows(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> FeatureRow<'_> {
        let (lo, hi) = (self.offsets[r], self.offsets[r + 1]);
        FeatureRow {
            cols: &self.cols[lo..hi],
            vals: &self.vals[lo..hi],
        }
    }

    pub fn dense_row(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (c, v) in self.row(r).iter() {
            out[c] = v;
        }
        out
    }

    /// Rows for the given row indices, in that order.
    pub fn select(&self, rows: &[usize]) -> FeatureMatrix {
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &r in rows {
            let row = self.row(r);
            cols.extend_from_slice(row.cols);
            vals.extend_from_slice(row.vals);
            offsets.push(cols.len());
        }
        FeatureMatrix {
            space: self.space.clone(),
            nodes: rows.iter().map(|&r| self.nodes[r]).collect(),
            offsets,
            cols,
            vals,
        }
    }

    /// Same rows with every column multiplied by `scale[c]`.
    pub fn scale_columns(&self, scale: &[f64]) -> FeatureMatrix {
        let mut out = self.clone();
        for (c, v) in out.cols.iter().zip(out.vals.iter_mut()) {
            *v *= scale[*c as usize];
        }
        out
    }
}

/// Scores of one bin-count table under `+|W|` smoothing.
pub(crate) struct BinScorer<'a> {
    pub counts: &'a BinCounts,
}

impl<'a> BinScorer<'a> {
    pub fn new(counts: &'a BinCounts) -> Self {
        BinScorer { counts }
    }

    #[inline]
    pub fn score(&self, i: NodeId, w: usize) -> f64 {
        let (p, m) = self.counts.get(i, w);
        onehop_score_binned(p, m, self.counts.n_plus, self.counts.n_minus, self.counts.bin_count())
    }

    /// Writes `score(i, w')` for every `w'` into `buf`.
    pub fn fill(&self, i: NodeId, buf: &mut [f64]) {
        let base = onehop_score_binned(0, 0, self.counts.n_plus, self.counts.n_minus, self.counts.bin_count());
        buf.fill(base);
        for (w, _, _) in self.counts.stored_bins(i) {
            buf[w] = self.score(i, w);
        }
        if let Some(z) = self.counts.no_edge_bin() {
            buf[z] = self.score(i, z);
        }
    }

    /// `sum_i score(i, w')` over every node, for every `w'`.
    pub fn column_totals(&self) -> Vec<f64> {
        let w = self.counts.bin_count();
        let n = self.counts.node_count();
        let mut buf = vec![0.0; w];
        let mut totals = vec![0.0; w];
        for i in 0..n as NodeId {
            self.fill(i, &mut buf);
            for (t, b) in totals.iter_mut().zip(&buf) {
                *t += b;
            }
        }
        totals
    }

    /// `sum_i score(i, w)` for a single bin.
    pub fn total_for(&self, w: usize) -> f64 {
        (0..self.counts.node_count() as NodeId).map(|i| self.score(i, w)).sum()
    }
}

/// One-hop baseline scores `s_i` for every node.
pub(crate) fn degree_scores(d: &DegreeCounts) -> Vec<f64> {
    d.plus
        .iter()
        .zip(&d.minus)
        .map(|(&p, &m)| onehop_score_baseline(p, m, d.n_plus, d.n_minus))
        .collect()
}

/// Two-hop sums of a per-node score stratified by the target's bin:
/// `out[offset + w] += sum_i 1[x_i = w] * scores[i]`.
pub(crate) fn scalar_by_bin(
    row: AssignmentRow<'_>,
    no_edge: Option<usize>,
    scores: &[f64],
    total: f64,
    offset: usize,
    out: &mut Vec<(u32, f64)>,
) {
    let mut materialized = 0.0;
    for (i, w) in row.iter() {
        let s = scores[i as usize];
        out.push(((offset + w) as u32, s));
        materialized += s;
    }
    if let Some(z) = no_edge {
        out.push(((offset + z) as u32, total - materialized));
    }
}

/// Bin-matched two-hop sums:
/// `out[offset + w] += sum_i 1[x_i = w] * score_i(w)`.
pub(crate) fn binned_by_bin(
    row: AssignmentRow<'_>,
    scorer: &BinScorer<'_>,
    no_edge_total: f64,
    offset: usize,
    out: &mut Vec<(u32, f64)>,
) {
    let z = scorer.counts.no_edge_bin();
    let mut materialized_z = 0.0;
    for (i, w) in row.iter() {
        out.push(((offset + w) as u32, scorer.score(i, w)));
        if let Some(z) = z {
            materialized_z += scorer.score(i, z);
        }
    }
    if let Some(z) = z {
        out.push(((offset + z) as u32, no_edge_total - materialized_z));
    }
}

/// Decoupled two-hop / one-hop sums:
/// `out[w * |W| + w'] += sum_i 1[x_i = w] * score_i(w')`.
pub(crate) fn binned_pairs(row: AssignmentRow<'_>, scorer: &BinScorer<'_>, totals: &[f64], out: &mut Vec<(u32, f64)>) {
    let width = scorer.counts.bin_count();
    let z = scorer.counts.no_edge_bin();
    let mut order: Vec<(usize, NodeId)> = row.iter().map(|(i, w)| (w, i)).collect();
    order.sort_by_key(|e| e.0);

    let mut buf = vec![0.0; width];
    let mut group = vec![0.0; width];
    let mut materialized = if z.is_some() { vec![0.0; width] } else { Vec::new() };
    let mut start = 0;
    while start < order.len() {
        let w = order[start].0;
        group.fill(0.0);
        let mut end = start;
        while end < order.len() && order[end].0 == w {
            scorer.fill(order[end].1, &mut buf);
            for (g, b) in group.iter_mut().zip(&buf) {
                *g += b;
            }
            end += 1;
        }
        for (wp, g) in group.iter().enumerate() {
            out.push(((w * width + wp) as u32, *g));
        }
        if z.is_some() {
            for (m, g) in materialized.iter_mut().zip(&group) {
                *m += g;
            }
        }
        start = end;
    }
    if let Some(z) = z {
        for (wp, (t, m)) in totals.iter().zip(&materialized).enumerate() {
            out.push(((z * width + wp) as u32, t - m));
        }
    }
}

fn check_counts(counts: &NbCounts, bins: &BinAssignment) -> Result<()> {
    if counts.bins.bin_count() != bins.bin_count() || counts.bins.node_count() != bins.node_count() {
        return Err(Error::Dimension {
            expected: bins.bin_count(),
            actual: counts.bins.bin_count(),
        });
    }
    Ok(())
}

fn check_targets(targets: &[NodeId], n: usize) -> Result<()> {
    match targets.iter().find(|&&t| t as usize >= n) {
        Some(&t) => Err(Error::Range {
            what: "target node",
            value: t as usize,
            limit: n,
        }),
        None => Ok(()),
    }
}

pub(crate) fn build_rows(
    space: FeatureSpace,
    targets: &[NodeId],
    row_fn: impl Fn(NodeId, &mut Vec<(u32, f64)>) + Sync,
) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<(u32, f64)>> = targets
        .par_iter()
        .map(|&u| {
            let mut out = Vec::new();
            row_fn(u, &mut out);
            out
        })
        .collect();
    FeatureMatrix::from_rows(space, targets.to_vec(), rows)
}

/// Unweighted two-hop sum `sum_{i adjacent to u} s_i` with `+2` smoothing.
pub fn features_baseline(counts: &NbCounts, bins: &BinAssignment, targets: &[NodeId]) -> Result<FeatureMatrix> {
    check_counts(counts, bins)?;
    check_targets(targets, bins.node_count())?;
    let scores = degree_scores(&counts.degrees);
    build_rows(FeatureSpace::Scalar, targets, |u, out| {
        let s: f64 = bins.row(u).iter().map(|(i, _)| scores[i as usize]).sum();
        out.push((0, s));
    })
}

/// Per-bin two-hop sums of unbinned one-hop scores.
pub fn features_v1(
    counts: &NbCounts,
    bins: &BinAssignment,
    scheme: &BinScheme,
    targets: &[NodeId],
) -> Result<FeatureMatrix> {
    check_counts(counts, bins)?;
    check_targets(targets, bins.node_count())?;
    let scores = degree_scores(&counts.degrees);
    let total: f64 = if bins.no_edge_bin().is_some() {
        scores.iter().sum()
    } else {
        0.0
    };
    build_rows(FeatureSpace::Bins(scheme.clone()), targets, |u, out| {
        scalar_by_bin(bins.row(u), bins.no_edge_bin(), &scores, total, 0, out)
    })
}

/// Per-bin two-hop sums of one-hop scores computed within the same bin.
pub fn features_v2(
    counts: &NbCounts,
    bins: &BinAssignment,
    scheme: &BinScheme,
    targets: &[NodeId],
) -> Result<FeatureMatrix> {
    check_counts(counts, bins)?;
    check_targets(targets, bins.node_count())?;
    let scorer = BinScorer::new(&counts.bins);
    let z_total = bins.no_edge_bin().map_or(0.0, |z| scorer.total_for(z));
    build_rows(FeatureSpace::Bins(scheme.clone()), targets, |u, out| {
        binned_by_bin(bins.row(u), &scorer, z_total, 0, out)
    })
}

/// Two-hop sums over bin `w` of one-hop scores in every bin `w'`.
pub fn features_v2star(
    counts: &NbCounts,
    bins: &BinAssignment,
    scheme: &BinScheme,
    targets: &[NodeId],
) -> Result<FeatureMatrix> {
    check_counts(counts, bins)?;
    check_targets(targets, bins.node_count())?;
    let scorer = BinScorer::new(&counts.bins);
    let totals = if bins.no_edge_bin().is_some() {
        scorer.column_totals()
    } else {
        Vec::new()
    };
    build_rows(FeatureSpace::BinPairs(scheme.clone()), targets, |u, out| {
        binned_pairs(bins.row(u), &scorer, &totals, out)
    })
}
