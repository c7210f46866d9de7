//! Feature vectors that combine several layers of a multiplex graph: per-layer
//! concatenation (Version 0), product bins weighting per-layer scores
//! (Version I) and classifiers within product bins (Version II and II*).

use crate::binning::{BinAssignment, BinScheme};
use crate::error::{Error, Result};
use crate::graphstore::{MultilayerGraph, NodeId};
use crate::nbcore::{
    binned_by_bin, binned_pairs, build_rows, degree_scores, scalar_by_bin, BinCounts, BinScorer, DegreeCounts,
    FeatureMatrix, FeatureSpace, TrainLabels,
};

/// Default ceiling on the number of product bins for Version II*.
pub const DEFAULT_MAX_PRODUCT_BINS: usize = 4096;

/// Per-layer unbinned counts plus pooled counts over product bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PerLayerCounts {
    layers: Vec<usize>,
    per_layer: Vec<DegreeCounts>,
    product: Option<BinCounts>,
}

impl PerLayerCounts {
    /// Per-layer counts for `layers`, and product-bin counts when
    /// `product_bins` is given.
    pub fn accumulate(
        g: &MultilayerGraph,
        layers: &[usize],
        product_bins: Option<&BinAssignment>,
        train: &TrainLabels,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("at least one layer is required".into()));
        }
        if g.node_count() != train.node_count() {
            return Err(Error::Dimension {
                expected: g.node_count(),
                actual: train.node_count(),
            });
        }
        let per_layer = layers
            .iter()
            .map(|&k| DegreeCounts::accumulate(g, &[k], train))
            .collect::<Result<Vec<_>>>()?;
        let product = product_bins.map(|b| BinCounts::accumulate(b, train)).transpose()?;
        Ok(PerLayerCounts {
            layers: layers.to_vec(),
            per_layer,
            product,
        })
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn layer(&self, pos: usize) -> &DegreeCounts {
        &self.per_layer[pos]
    }

    pub fn product(&self) -> Option<&BinCounts> {
        self.product.as_ref()
    }

    fn product_for(&self, bins: &BinAssignment) -> Result<&BinCounts> {
        let p = self
            .product
            .as_ref()
            .ok_or_else(|| Error::Config("product-bin counts were not accumulated".into()))?;
        if p.bin_count() != bins.bin_count() || p.node_count() != bins.node_count() {
            return Err(Error::Dimension {
                expected: bins.bin_count(),
                actual: p.bin_count(),
            });
        }
        Ok(p)
    }
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

fn scalar_totals(scores: &[f64], bins: &BinAssignment) -> f64 {
    if bins.no_edge_bin().is_some() {
        scores.iter().sum()
    } else {
        0.0
    }
}

/// Concatenated per-layer Version I blocks. `per_layer_bins[k]` must be a
/// single-layer assignment over `counts.layers()[k]`.
pub fn features_ml_v0(
    counts: &PerLayerCounts,
    per_layer_bins: &[BinAssignment],
    schemes: &[BinScheme],
    targets: &[NodeId],
) -> Result<FeatureMatrix> {
    if per_layer_bins.len() != counts.layers.len() || schemes.len() != counts.layers.len() {
        return Err(Error::Dimension {
            expected: counts.layers.len(),
            actual: per_layer_bins.len().min(schemes.len()),
        });
    }
    for ((bins, scheme), &k) in per_layer_bins.iter().zip(schemes).zip(&counts.layers) {
        if bins.layers() != [k] || scheme.layer_ids() != [k] || scheme.bin_count() != bins.bin_count() {
            return Err(Error::Scheme(format!(
                "per-layer bins must cover exactly layer {k} in layer order"
            )));
        }
    }
    let n = counts.per_layer[0].plus.len();
    check_targets(targets, n)?;
    let scores: Vec<Vec<f64>> = counts.per_layer.iter().map(degree_scores).collect();
    let totals: Vec<f64> = scores
        .iter()
        .zip(per_layer_bins)
        .map(|(s, b)| scalar_totals(s, b))
        .collect();
    let mut offsets = Vec::with_capacity(per_layer_bins.len());
    let mut acc = 0;
    for b in per_layer_bins {
        offsets.push(acc);
        acc += b.bin_count();
    }
    build_rows(FeatureSpace::LayerBlocks(schemes.to_vec()), targets, |u, out| {
        for (k, bins) in per_layer_bins.iter().enumerate() {
            scalar_by_bin(bins.row(u), bins.no_edge_bin(), &scores[k], totals[k], offsets[k], out);
        }
    })
}

/// Entry `(k, w)`: two-hop sum over product bin `w` of layer `k`'s one-hop
/// score.
pub fn features_ml_v1(
    counts: &PerLayerCounts,
    product_bins: &BinAssignment,
    scheme: &BinScheme,
    targets: &[NodeId],
) -> Result<FeatureMatrix> {
    check_targets(targets, product_bins.node_count())?;
    let width = product_bins.bin_count();
    let scores: Vec<Vec<f64>> = counts.per_layer.iter().map(degree_scores).collect();
    let totals: Vec<f64> = scores.iter().map(|s| scalar_totals(s, product_bins)).collect();
    let space = FeatureSpace::LayerByBin {
        layers: counts.layers.clone(),
        scheme: scheme.clone(),
    };
    build_rows(space, targets, |u, out| {
        for (k, s) in scores.iter().enumerate() {
            scalar_by_bin(
                product_bins.row(u),
                product_bins.no_edge_bin(),
                s,
                totals[k],
                k * width,
                out,
            );
        }
    })
}

/// Entry `w`: two-hop sum over product bin `w` of the pooled one-hop score
/// within `w`.
pub fn features_ml_v2(
    counts: &PerLayerCounts,
    product_bins: &BinAssignment,
    scheme: &BinScheme,
    targets: &[NodeId],
) -> Result<FeatureMatrix> {
    let product = counts.product_for(product_bins)?;
    check_targets(targets, product_bins.node_count())?;
    let scorer = BinScorer::new(product);
    let z_total = product_bins.no_edge_bin().map_or(0.0, |z| scorer.total_for(z));
    build_rows(FeatureSpace::Bins(scheme.clone()), targets, |u, out| {
        binned_by_bin(product_bins.row(u), &scorer, z_total, 0, out)
    })
}

/// Entry `(w, w')`: two-hop sum over product bin `w` of the pooled one-hop
/// score in `w'`. Refuses product schemes with more than `max_bins` bins
/// unless `allow_oversize` is set.
pub fn features_ml_v2star(
    counts: &PerLayerCounts,
    product_bins: &BinAssignment,
    scheme: &BinScheme,
    targets: &[NodeId],
    max_bins: usize,
    allow_oversize: bool,
) -> Result<FeatureMatrix> {
    let width = product_bins.bin_count();
    if width > max_bins && !allow_oversize {
        return Err(Error::Config(format!(
            "{width} product bins give {} pair features, above the cap of {max_bins} bins; \
             use fewer bins per layer, exclude absent layers, or raise the cap explicitly",
            width as u128 * width as u128
        )));
    }
    let product = counts.product_for(product_bins)?;
    check_targets(targets, product_bins.node_count())?;
    let scorer = BinScorer::new(product);
    let totals = if product_bins.no_edge_bin().is_some() {
        scorer.column_totals()
    } else {
        Vec::new()
    };
    build_rows(FeatureSpace::BinPairs(scheme.clone()), targets, |u, out| {
        binned_pairs(product_bins.row(u), &scorer, &totals, out)
    })
}
