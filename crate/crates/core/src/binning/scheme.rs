use serde::{Deserialize, Serialize};

use super::primitives::{assign_direction_bin, percentile_thresholds, weight_bin_unchecked};
use crate::error::{Error, Result};
use crate::graphstore::{Layer, MultilayerGraph, NodeId};

/// What a single-layer scheme looks at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerBinKind {
    /// none / out-only / in-only / reciprocal.
    Direction,
    /// Weight intervals, direction ignored. On a directed layer the two
    /// directions' weights are summed.
    WeightThresholds { thresholds: Vec<f64> },
    /// Outgoing weight bin x incoming weight bin; an absent direction has
    /// weight 0.
    DirectionXWeight { thresholds: Vec<f64> },
}

/// The relation between a target and a source node within one layer.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LayerRelation {
    /// Weight of `target -> source`.
    pub out: Option<f64>,
    /// Weight of `source -> target`.
    pub inc: Option<f64>,
    /// Set for undirected layers, where `out` and `inc` are the same edge.
    pub undirected: bool,
}

impl LayerRelation {
    pub fn is_edge(&self) -> bool {
        self.out.is_some() || self.inc.is_some()
    }

    pub fn between(layer: &Layer, target: NodeId, source: NodeId) -> Self {
        LayerRelation {
            out: layer.weight(target, source),
            inc: layer.weight(source, target),
            undirected: !layer.is_directed(),
        }
    }
}

/// A resolved bin scheme for one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerScheme {
    pub layer: usize,
    pub kind: LayerBinKind,
    /// When set, node pairs without an edge receive no bin at all.
    pub existing_edges_only: bool,
}

impl LayerScheme {
    pub fn new(layer: usize, kind: LayerBinKind, existing_edges_only: bool) -> Result<Self> {
        let s = LayerScheme {
            layer,
            kind,
            existing_edges_only,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        if let LayerBinKind::WeightThresholds { thresholds } | LayerBinKind::DirectionXWeight { thresholds } =
            &self.kind
        {
            if thresholds.iter().any(|t| !t.is_finite()) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Scheme(format!(
                    "thresholds must be finite and strictly ascending, got {thresholds:?}"
                )));
            }
        }
        let min = if self.existing_edges_only { 1 } else { 2 };
        if self.bin_count() < min {
            return Err(Error::Scheme(format!(
                "scheme for layer {} has {} bin(s); at least {min} required{}",
                self.layer,
                self.bin_count(),
                if self.existing_edges_only {
                    ""
                } else {
                    " when pairs without an edge are binned"
                }
            )));
        }
        Ok(())
    }

    /// Rejects schemes the layer cannot support.
    pub fn validate(&self, g: &MultilayerGraph) -> Result<()> {
        self.check()?;
        let layer = g.layer(self.layer)?;
        if !layer.is_directed()
            && matches!(
                self.kind,
                LayerBinKind::Direction | LayerBinKind::DirectionXWeight { .. }
            )
        {
            return Err(Error::Scheme(format!(
                "direction bins requested on undirected layer {}",
                self.layer
            )));
        }
        Ok(())
    }

    pub fn bin_count(&self) -> usize {
        match &self.kind {
            LayerBinKind::Direction if self.existing_edges_only => 3,
            LayerBinKind::Direction => 4,
            LayerBinKind::WeightThresholds { thresholds } => thresholds.len() + 1,
            LayerBinKind::DirectionXWeight { thresholds } => (thresholds.len() + 1).pow(2),
        }
    }

    /// The bin of pairs with no edge, if such pairs are binned.
    pub fn no_edge_bin(&self) -> Option<usize> {
        if self.existing_edges_only {
            None
        } else {
            self.bin_for(LayerRelation::default())
        }
    }

    /// Bin of a relation, or `None` when it receives no bin.
    pub fn bin_for(&self, rel: LayerRelation) -> Option<usize> {
        if self.existing_edges_only && !rel.is_edge() {
            return None;
        }
        Some(match &self.kind {
            LayerBinKind::Direction => {
                let d = assign_direction_bin(rel.out.is_some(), rel.inc.is_some()).index();
                if self.existing_edges_only {
                    d - 1
                } else {
                    d
                }
            }
            LayerBinKind::WeightThresholds { thresholds } => {
                let w = if rel.undirected {
                    rel.out.or(rel.inc).unwrap_or(0.0)
                } else {
                    rel.out.unwrap_or(0.0) + rel.inc.unwrap_or(0.0)
                };
                weight_bin_unchecked(w, thresholds)
            }
            LayerBinKind::DirectionXWeight { thresholds } => {
                let per = thresholds.len() + 1;
                weight_bin_unchecked(rel.out.unwrap_or(0.0), thresholds) * per
                    + weight_bin_unchecked(rel.inc.unwrap_or(0.0), thresholds)
            }
        })
    }

    pub fn bin_label(&self, bin: usize) -> String {
        let interval = |t: &[f64], b: usize| -> String {
            let lo = if b == 0 {
                "-inf".to_string()
            } else {
                t[b - 1].to_string()
            };
            let hi = if b == t.len() {
                "inf".to_string()
            } else {
                t[b].to_string()
            };
            format!("({lo},{hi}]")
        };
        match &self.kind {
            LayerBinKind::Direction => {
                let offset = usize::from(self.existing_edges_only);
                super::DirectionBin::ALL[bin + offset].name().to_string()
            }
            LayerBinKind::WeightThresholds { thresholds } => interval(thresholds, bin),
            LayerBinKind::DirectionXWeight { thresholds } => {
                let per = thresholds.len() + 1;
                format!(
                    "out{}xin{}",
                    interval(thresholds, bin / per),
                    interval(thresholds, bin % per)
                )
            }
        }
    }
}

/// How a product scheme treats a pair that has an edge in some layers but not
/// in a layer whose scheme bins existing edges only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsentLayer {
    /// Give that layer an extra "absent" sub-bin.
    #[default]
    Category,
    /// Drop the pair.
    Exclude,
}

/// A complete bin scheme over one layer or the Cartesian product of several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BinScheme {
    Single(LayerScheme),
    Product {
        layers: Vec<LayerScheme>,
        absent: AbsentLayer,
    },
}

impl BinScheme {
    pub fn product(layers: Vec<LayerScheme>, absent: AbsentLayer) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Scheme("a product scheme needs at least one layer".into()));
        }
        let mut ids: Vec<usize> = layers.iter().map(|s| s.layer).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != layers.len() {
            return Err(Error::Scheme("a layer appears twice in a product scheme".into()));
        }
        Ok(BinScheme::Product { layers, absent })
    }

    pub fn children(&self) -> &[LayerScheme] {
        match self {
            BinScheme::Single(s) => std::slice::from_ref(s),
            BinScheme::Product { layers, .. } => layers,
        }
    }

    pub fn layer_ids(&self) -> Vec<usize> {
        self.children().iter().map(|s| s.layer).collect()
    }

    fn absent_category(&self, child: &LayerScheme) -> bool {
        match self {
            BinScheme::Single(_) => false,
            BinScheme::Product { layers, absent } => {
                layers.len() > 1 && child.existing_edges_only && *absent == AbsentLayer::Category
            }
        }
    }

    /// Per-layer radix of the product encoding.
    pub fn radices(&self) -> Vec<usize> {
        self.children()
            .iter()
            .map(|c| c.bin_count() + usize::from(self.absent_category(c)))
            .collect()
    }

    /// `|W|`, or `prod_k |W^(k)|` (with absent sub-bins) for products.
    pub fn bin_count(&self) -> usize {
        self.radices().iter().product()
    }

    pub fn no_edge_bin(&self) -> Option<usize> {
        let mut code = 0usize;
        for (child, radix) in self.children().iter().zip(self.radices()) {
            code = code * radix + child.no_edge_bin()?;
        }
        Some(code)
    }

    /// Bin of a pair given its relation in each child layer, in child order.
    pub fn bin_for(&self, relations: &[LayerRelation]) -> Option<usize> {
        debug_assert_eq!(relations.len(), self.children().len());
        if !relations.iter().any(LayerRelation::is_edge) {
            return self.no_edge_bin();
        }
        let mut code = 0usize;
        for ((child, rel), radix) in self.children().iter().zip(relations).zip(self.radices()) {
            let b = match child.bin_for(*rel) {
                Some(b) => b,
                None if self.absent_category(child) => radix - 1,
                None => return None,
            };
            code = code * radix + b;
        }
        Some(code)
    }

    pub fn bin_label(&self, bin: usize) -> String {
        match self {
            BinScheme::Single(s) => s.bin_label(bin),
            BinScheme::Product { layers, .. } => {
                let radices = self.radices();
                super::decode_product_bin(bin, &radices)
                    .into_iter()
                    .zip(layers)
                    .zip(&radices)
                    .map(|((b, child), &radix)| {
                        if self.absent_category(child) && b == radix - 1 {
                            format!("L{}:absent", child.layer)
                        } else {
                            format!("L{}:{}", child.layer, child.bin_label(b))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("|")
            }
        }
    }

    pub fn validate(&self, g: &MultilayerGraph) -> Result<()> {
        for c in self.children() {
            c.validate(g)?;
        }
        Ok(())
    }

    /// Stable 64-bit FNV-1a digest of the scheme's canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).unwrap_or_default();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinKindName {
    Direction,
    WeightThresholds,
    DirectionXWeight,
}

/// Declarative bin scheme for one layer, as written in experiment configs.
/// Percentile cut points are resolved against the layer's edge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    #[serde(default)]
    pub layer: usize,
    pub kind: BinKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percentiles: Option<Vec<f64>>,
    #[serde(default)]
    pub existing_edges_only: bool,
}

impl BinSpec {
    pub fn resolve(&self, g: &MultilayerGraph) -> Result<LayerScheme> {
        let layer = g.layer(self.layer)?;
        let thresholds = match (&self.thresholds, &self.percentiles) {
            (Some(_), Some(_)) => return Err(Error::Scheme("give either thresholds or percentiles, not both".into())),
            (Some(t), None) => t.clone(),
            (None, Some(p)) => {
                let weights: Vec<f64> = layer.edges().map(|e| e.weight).collect();
                percentile_thresholds(&weights, p)?
            }
            (None, None) => Vec::new(),
        };
        let kind = match self.kind {
            BinKindName::Direction => {
                if !thresholds.is_empty() {
                    return Err(Error::Scheme("direction bins take no thresholds".into()));
                }
                LayerBinKind::Direction
            }
            BinKindName::WeightThresholds => LayerBinKind::WeightThresholds { thresholds },
            BinKindName::DirectionXWeight => LayerBinKind::DirectionXWeight { thresholds },
        };
        let scheme = LayerScheme::new(self.layer, kind, self.existing_edges_only)?;
        scheme.validate(g)?;
        Ok(scheme)
    }
}
