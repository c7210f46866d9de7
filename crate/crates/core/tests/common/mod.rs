//! Dense O(N^2) reference implementations used to check the sparse
//! featurizers. Everything here works from raw weight matrices and explicit
//! loops over every node pair, sharing no code with the library beyond the
//! graph constructor.

#![allow(dead_code)]

use linknb::binning::{build_assignment, AbsentLayer, BinAssignment, BinScheme, LayerBinKind, LayerScheme};
use linknb::graphstore::{GraphBuilder, Label, MultilayerGraph, NodeId};
use linknb::linkpred::{pair_features, EndpointBins, EndpointKind, PairCounts, PairSample};
use linknb::multilayer::{features_ml_v0, features_ml_v1, features_ml_v2, features_ml_v2star, PerLayerCounts};
use linknb::nbcore::{
    accumulate_counts_from, features_baseline, features_v1, features_v2, features_v2star, FeatureMatrix, TrainLabels,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Dense weights `w[u][v]` of one layer; symmetric when undirected.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub directed: bool,
    pub w: Vec<Vec<Option<f64>>>,
}

impl DenseLayer {
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.w[u][v].is_some() || self.w[v][u].is_some()
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub n: usize,
    pub layers: Vec<DenseLayer>,
    /// Training labels as +1 / -1.
    pub labels: Vec<Option<i8>>,
}

impl Case {
    pub fn random<R: Rng>(rng: &mut R, max_n: usize, max_layers: usize) -> Case {
        let n = rng.gen_range(4..=max_n);
        let k = rng.gen_range(1..=max_layers);
        let layers = (0..k)
            .map(|_| {
                let directed = rng.gen_bool(0.6);
                let density = rng.gen_range(0.05..0.5);
                let integer = rng.gen_bool(0.5);
                let mut w = vec![vec![None; n]; n];
                for u in 0..n {
                    for v in 0..n {
                        if u == v || (!directed && v < u) {
                            continue;
                        }
                        if rng.gen::<f64>() < density {
                            let x = if integer {
                                rng.gen_range(1..=6) as f64
                            } else {
                                rng.gen_range(0.0..3.0)
                            };
                            w[u][v] = Some(x);
                            if !directed {
                                w[v][u] = Some(x);
                            }
                        }
                    }
                }
                DenseLayer { directed, w }
            })
            .collect();
        let labeled = rng.gen_range(0.2..0.9);
        let labels = (0..n)
            .map(|_| rng.gen_bool(labeled).then(|| if rng.gen_bool(0.4) { 1 } else { -1 }))
            .collect();
        Case { n, layers, labels }
    }

    pub fn graph(&self) -> MultilayerGraph {
        let mut b = GraphBuilder::new(self.n);
        for (k, l) in self.layers.iter().enumerate() {
            b.add_layer(l.directed);
            for u in 0..self.n {
                for v in 0..self.n {
                    if !l.directed && v < u {
                        continue;
                    }
                    if let Some(x) = l.w[u][v] {
                        b.add_edge(k, u as u32, v as u32, x).unwrap();
                    }
                }
            }
        }
        b.build().unwrap()
    }

    pub fn train_labels(&self) -> Vec<Option<Label>> {
        self.labels.iter().map(|l| l.map(|s| Label::from_bool(s > 0))).collect()
    }

    pub fn n_pos(&self) -> u64 {
        self.labels.iter().filter(|l| **l == Some(1)).count() as u64
    }

    pub fn n_neg(&self) -> u64 {
        self.labels.iter().filter(|l| **l == Some(-1)).count() as u64
    }
}

/// Reference description of one layer's bins.
#[derive(Debug, Clone, PartialEq)]
pub enum RefKind {
    Direction,
    Weight(Vec<f64>),
    DirWeight(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefLayerBins {
    pub layer: usize,
    pub kind: RefKind,
    pub existing_only: bool,
}

fn interval_index(x: f64, cuts: &[f64]) -> usize {
    let mut b = 0;
    for &c in cuts {
        if x > c {
            b += 1;
        }
    }
    b
}

impl RefLayerBins {
    pub fn count(&self) -> usize {
        match &self.kind {
            RefKind::Direction => {
                if self.existing_only {
                    3
                } else {
                    4
                }
            }
            RefKind::Weight(t) => t.len() + 1,
            RefKind::DirWeight(t) => (t.len() + 1) * (t.len() + 1),
        }
    }

    /// Bin of (target u, source i), `None` if the pair is not binned.
    pub fn bin(&self, case: &Case, u: usize, i: usize) -> Option<usize> {
        let l = &case.layers[self.layer];
        let out = l.w[u][i];
        let inc = l.w[i][u];
        let edge = out.is_some() || inc.is_some();
        if self.existing_only && !edge {
            return None;
        }
        Some(match &self.kind {
            RefKind::Direction => {
                let code = match (out.is_some(), inc.is_some()) {
                    (false, false) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (true, true) => 3,
                };
                if self.existing_only {
                    code - 1
                } else {
                    code
                }
            }
            RefKind::Weight(t) => {
                let w = if l.directed {
                    out.unwrap_or(0.0) + inc.unwrap_or(0.0)
                } else {
                    out.unwrap_or(0.0)
                };
                interval_index(w, t)
            }
            RefKind::DirWeight(t) => {
                interval_index(out.unwrap_or(0.0), t) * (t.len() + 1) + interval_index(inc.unwrap_or(0.0), t)
            }
        })
    }
}

/// Reference product of per-layer bins, first layer most significant.
#[derive(Debug, Clone)]
pub struct RefBins {
    pub children: Vec<RefLayerBins>,
    /// Only meaningful for products of more than one layer.
    pub absent_category: bool,
    pub product: bool,
}

impl RefBins {
    fn absent_slot(&self, c: &RefLayerBins) -> bool {
        self.product && self.children.len() > 1 && c.existing_only && self.absent_category
    }

    pub fn radices(&self) -> Vec<usize> {
        self.children
            .iter()
            .map(|c| c.count() + usize::from(self.absent_slot(c)))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.radices().iter().product()
    }

    pub fn layers(&self) -> Vec<usize> {
        self.children.iter().map(|c| c.layer).collect()
    }

    pub fn adjacent(&self, case: &Case, u: usize, i: usize) -> bool {
        self.children.iter().any(|c| case.layers[c.layer].adjacent(u, i))
    }

    pub fn bin(&self, case: &Case, u: usize, i: usize) -> Option<usize> {
        let radices = self.radices();
        let any_edge = self.adjacent(case, u, i);
        if !any_edge && self.children.iter().any(|c| c.existing_only) {
            return None;
        }
        let mut code = 0;
        for (c, &r) in self.children.iter().zip(&radices) {
            let b = match c.bin(case, u, i) {
                Some(b) => b,
                None if self.absent_slot(c) => r - 1,
                None => return None,
            };
            code = code * r + b;
        }
        Some(code)
    }

    pub fn no_edge_bin(&self) -> Option<usize> {
        if self.children.iter().any(|c| c.existing_only) {
            return None;
        }
        let radices = self.radices();
        let mut code = 0;
        for (c, &r) in self.children.iter().zip(&radices) {
            let b = match c.kind {
                RefKind::Direction => 0,
                RefKind::Weight(ref t) => interval_index(0.0, t),
                RefKind::DirWeight(ref t) => interval_index(0.0, t) * (t.len() + 1) + interval_index(0.0, t),
            };
            code = code * r + b;
        }
        Some(code)
    }
}

fn random_cuts<R: Rng>(rng: &mut R) -> Vec<f64> {
    let k = rng.gen_range(0..=3);
    let mut pool: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0];
    pool.shuffle(rng);
    let mut t: Vec<f64> = pool.into_iter().take(k).collect();
    t.sort_by(f64::total_cmp);
    t
}

/// Random valid per-layer bins for `layer`.
pub fn random_layer_bins<R: Rng>(rng: &mut R, case: &Case, layer: usize) -> RefLayerBins {
    loop {
        let directed = case.layers[layer].directed;
        let kind = match rng.gen_range(0..3) {
            0 if directed => RefKind::Direction,
            1 if directed => RefKind::DirWeight(random_cuts(rng)),
            _ => RefKind::Weight(random_cuts(rng)),
        };
        let existing_only = rng.gen_bool(0.4);
        let b = RefLayerBins {
            layer,
            kind,
            existing_only,
        };
        if b.count() >= if existing_only { 1 } else { 2 } {
            return b;
        }
    }
}

pub fn ln_score(dp: u64, dm: u64, np: u64, nm: u64, w: usize) -> f64 {
    ((dp as f64 + 1.0) / (dm as f64 + 1.0) * (nm as f64 + w as f64) / (np as f64 + w as f64)).ln()
}

/// `s_i` from labeled neighbors of `i` in any of `layers`.
pub fn degree_score(case: &Case, layers: &[usize], i: usize) -> f64 {
    let (mut dp, mut dm) = (0, 0);
    for s in 0..case.n {
        if layers.iter().any(|&k| case.layers[k].adjacent(i, s)) {
            match case.labels[s] {
                Some(1) => dp += 1,
                Some(_) => dm += 1,
                None => {}
            }
        }
    }
    ln_score(dp, dm, case.n_pos(), case.n_neg(), 2)
}

/// Score of `i` within bin `w`.
pub fn bin_score(case: &Case, bins: &RefBins, i: usize, w: usize) -> f64 {
    let (mut dp, mut dm) = (0, 0);
    for s in 0..case.n {
        if bins.bin(case, i, s) == Some(w) {
            match case.labels[s] {
                Some(1) => dp += 1,
                Some(_) => dm += 1,
                None => {}
            }
        }
    }
    ln_score(dp, dm, case.n_pos(), case.n_neg(), bins.count())
}

pub fn ref_baseline(case: &Case, bins: &RefBins, u: usize) -> Vec<f64> {
    let layers = bins.layers();
    let mut total = 0.0;
    for i in 0..case.n {
        if bins.adjacent(case, u, i) && bins.bin(case, u, i).is_some() {
            total += degree_score(case, &layers, i);
        }
    }
    vec![total]
}

pub fn ref_v1(case: &Case, bins: &RefBins, score_layers: &[usize], u: usize) -> Vec<f64> {
    let mut out = vec![0.0; bins.count()];
    for i in 0..case.n {
        if let Some(w) = bins.bin(case, u, i) {
            out[w] += degree_score(case, score_layers, i);
        }
    }
    out
}

pub fn ref_v2(case: &Case, bins: &RefBins, u: usize) -> Vec<f64> {
    let mut out = vec![0.0; bins.count()];
    for i in 0..case.n {
        if let Some(w) = bins.bin(case, u, i) {
            out[w] += bin_score(case, bins, i, w);
        }
    }
    out
}

pub fn ref_v2star(case: &Case, bins: &RefBins, u: usize) -> Vec<f64> {
    let width = bins.count();
    let mut out = vec![0.0; width * width];
    for i in 0..case.n {
        if let Some(w) = bins.bin(case, u, i) {
            for wp in 0..width {
                out[w * width + wp] += bin_score(case, bins, i, wp);
            }
        }
    }
    out
}

pub fn ref_ml_v0(case: &Case, singles: &[RefBins], u: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for b in singles {
        out.extend(ref_v1(case, b, &b.layers(), u));
    }
    out
}

pub fn ref_ml_v1(case: &Case, product: &RefBins, u: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for k in product.layers() {
        out.extend(ref_v1(case, product, &[k], u));
    }
    out
}

/// Link-prediction reference. Endpoint bins are plain adjacency over
/// `layers` unless `endpoint` is set.
pub struct RefPairs<'a> {
    pub case: &'a Case,
    pub layers: Vec<usize>,
    pub endpoint: Option<RefBins>,
    /// Training pairs with labels.
    pub train: Vec<(usize, usize, i8)>,
}

impl RefPairs<'_> {
    fn per_endpoint(&self) -> usize {
        self.endpoint.as_ref().map_or(2, RefBins::count)
    }

    fn canonical(&self, a: usize, b: usize) -> (usize, usize) {
        let layers = self
            .endpoint
            .as_ref()
            .map_or_else(|| self.layers.clone(), RefBins::layers);
        let undirected = layers.iter().all(|&k| !self.case.layers[k].directed);
        if undirected && b < a {
            (b, a)
        } else {
            (a, b)
        }
    }

    fn endpoint_bin(&self, z: usize, i: usize) -> usize {
        match &self.endpoint {
            Some(b) => b.bin(self.case, z, i).expect("endpoint schemes bin every pair"),
            None => usize::from(self.layers.iter().any(|&k| self.case.layers[k].adjacent(z, i))),
        }
    }

    fn joint(&self, z1: usize, z2: usize, i: usize) -> usize {
        self.endpoint_bin(z1, i) * self.per_endpoint() + self.endpoint_bin(z2, i)
    }

    pub fn features(&self, a: usize, b: usize) -> Vec<f64> {
        let (z1, z2) = self.canonical(a, b);
        let width = self.per_endpoint() * self.per_endpoint();
        let np = self.train.iter().filter(|p| p.2 > 0).count() as u64;
        let nm = self.train.len() as u64 - np;
        let mut out = vec![0.0; width];
        for i in 0..self.case.n {
            let w = self.joint(z1, z2, i);
            let (mut dp, mut dm) = (0, 0);
            for &(p1, p2, y) in &self.train {
                let (p1, p2) = self.canonical(p1, p2);
                if self.joint(p1, p2, i) == w {
                    if y > 0 {
                        dp += 1;
                    } else {
                        dm += 1;
                    }
                }
            }
            out[w] += ln_score(dp, dm, np, nm, width);
        }
        out
    }
}

/// Largest absolute difference between two equal-length vectors.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn to_layer_scheme(b: &RefLayerBins) -> LayerScheme {
    let kind = match &b.kind {
        RefKind::Direction => LayerBinKind::Direction,
        RefKind::Weight(t) => LayerBinKind::WeightThresholds { thresholds: t.clone() },
        RefKind::DirWeight(t) => LayerBinKind::DirectionXWeight { thresholds: t.clone() },
    };
    LayerScheme::new(b.layer, kind, b.existing_only).unwrap()
}

pub fn to_scheme(b: &RefBins) -> BinScheme {
    let children: Vec<LayerScheme> = b.children.iter().map(to_layer_scheme).collect();
    if b.product {
        let absent = if b.absent_category {
            AbsentLayer::Category
        } else {
            AbsentLayer::Exclude
        };
        BinScheme::product(children, absent).unwrap()
    } else {
        BinScheme::Single(children.into_iter().next().unwrap())
    }
}

pub fn single(c: RefLayerBins) -> RefBins {
    RefBins {
        children: vec![c],
        absent_category: true,
        product: false,
    }
}

/// Random product over a random ordered subset of the case's layers.
pub fn random_product<R: Rng>(rng: &mut R, case: &Case) -> RefBins {
    let mut layers: Vec<usize> = (0..case.layers.len()).collect();
    layers.shuffle(rng);
    layers.truncate(rng.gen_range(1..=layers.len()));
    RefBins {
        children: layers.iter().map(|&k| random_layer_bins(rng, case, k)).collect(),
        absent_category: rng.gen_bool(0.6),
        product: true,
    }
}

/// Random endpoint scheme: one layer, every pair binned.
pub fn random_endpoint<R: Rng>(rng: &mut R, case: &Case) -> RefBins {
    let k = rng.gen_range(0..case.layers.len());
    loop {
        let mut c = random_layer_bins(rng, case, k);
        c.existing_only = false;
        if c.count() >= 2 {
            return single(c);
        }
    }
}

fn dense(x: &FeatureMatrix) -> Vec<Vec<f64>> {
    (0..x.rows()).map(|r| x.dense_row(r)).collect()
}

fn worst(lib: &FeatureMatrix, oracle: impl Fn(usize) -> Vec<f64>) -> f64 {
    dense(lib)
        .iter()
        .enumerate()
        .map(|(u, row)| max_abs_diff(row, &oracle(u)))
        .fold(0.0, f64::max)
}

/// Largest deviation of each featurizer from its dense reference on one case.
#[derive(Debug, Default, Clone)]
pub struct OracleDiffs {
    pub entries: Vec<(&'static str, f64)>,
}

impl OracleDiffs {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

/// Largest product bin count for which the dense pair-feature reference runs.
pub const DENSE_STAR_LIMIT: usize = 64;

pub fn compare_all<R: Rng>(rng: &mut R, case: &Case) -> OracleDiffs {
    let g = case.graph();
    let train = TrainLabels::from_labels(case.train_labels());
    let targets: Vec<NodeId> = (0..case.n as NodeId).collect();
    let mut diffs = OracleDiffs::default();

    let k0 = rng.gen_range(0..case.layers.len());
    let sref = single(random_layer_bins(rng, case, k0));
    let scheme = to_scheme(&sref);
    let bins = build_assignment(&g, &scheme).unwrap();
    let counts = accumulate_counts_from(&g, &bins, &train).unwrap();
    let layers = sref.layers();
    diffs.entries.push((
        "baseline",
        worst(&features_baseline(&counts, &bins, &targets).unwrap(), |u| {
            ref_baseline(case, &sref, u)
        }),
    ));
    diffs.entries.push((
        "v1",
        worst(&features_v1(&counts, &bins, &scheme, &targets).unwrap(), |u| {
            ref_v1(case, &sref, &layers, u)
        }),
    ));
    diffs.entries.push((
        "v2",
        worst(&features_v2(&counts, &bins, &scheme, &targets).unwrap(), |u| {
            ref_v2(case, &sref, u)
        }),
    ));
    diffs.entries.push((
        "v2star",
        worst(&features_v2star(&counts, &bins, &scheme, &targets).unwrap(), |u| {
            ref_v2star(case, &sref, u)
        }),
    ));

    let pref = random_product(rng, case);
    let pscheme = to_scheme(&pref);
    let pbins = build_assignment(&g, &pscheme).unwrap();
    let player = pref.layers();
    let pcounts = PerLayerCounts::accumulate(&g, &player, Some(&pbins), &train).unwrap();
    let singles: Vec<RefBins> = pref.children.iter().cloned().map(single).collect();
    let single_schemes: Vec<BinScheme> = singles.iter().map(to_scheme).collect();
    let single_bins: Vec<BinAssignment> = single_schemes
        .iter()
        .map(|s| build_assignment(&g, s).unwrap())
        .collect();
    diffs.entries.push((
        "ml_v0",
        worst(
            &features_ml_v0(&pcounts, &single_bins, &single_schemes, &targets).unwrap(),
            |u| ref_ml_v0(case, &singles, u),
        ),
    ));
    diffs.entries.push((
        "ml_v1",
        worst(&features_ml_v1(&pcounts, &pbins, &pscheme, &targets).unwrap(), |u| {
            ref_ml_v1(case, &pref, u)
        }),
    ));
    diffs.entries.push((
        "ml_v2",
        worst(&features_ml_v2(&pcounts, &pbins, &pscheme, &targets).unwrap(), |u| {
            ref_v2(case, &pref, u)
        }),
    ));
    if pref.count() <= DENSE_STAR_LIMIT {
        diffs.entries.push((
            "ml_v2star",
            worst(
                &features_ml_v2star(&pcounts, &pbins, &pscheme, &targets, 4096, false).unwrap(),
                |u| ref_v2star(case, &pref, u),
            ),
        ));
    }

    let (kind, endpoint, link_layers) = if rng.gen_bool(0.5) {
        let mut ls: Vec<usize> = (0..case.layers.len()).collect();
        ls.shuffle(rng);
        ls.truncate(rng.gen_range(1..=ls.len()));
        (EndpointKind::Adjacency, None, ls)
    } else {
        let e = random_endpoint(rng, case);
        (EndpointKind::Scheme(to_scheme(&e)), Some(e), Vec::new())
    };
    let endpoints = EndpointBins::build(&g, &link_layers, &kind).unwrap();
    let random_pair = |rng: &mut R| loop {
        let a = rng.gen_range(0..case.n);
        let b = rng.gen_range(0..case.n);
        if a != b {
            return (a, b);
        }
    };
    let mut samples = Vec::new();
    let mut ref_train = Vec::new();
    for _ in 0..rng.gen_range(2..25) {
        let (a, b) = random_pair(rng);
        let y: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
        samples.push(PairSample {
            z1: a as NodeId,
            z2: b as NodeId,
            label: Label::from_bool(y > 0),
        });
        ref_train.push((a, b, y));
    }
    let queries: Vec<(usize, usize)> = (0..20).map(|_| random_pair(rng)).collect();
    let pc = PairCounts::accumulate(&endpoints, &samples).unwrap();
    let q: Vec<(NodeId, NodeId)> = queries.iter().map(|&(a, b)| (a as NodeId, b as NodeId)).collect();
    let lib = pair_features(&pc, &endpoints, &q).unwrap();
    let reference = RefPairs {
        case,
        layers: link_layers,
        endpoint,
        train: ref_train,
    };
    diffs.entries.push((
        "pair_features",
        worst(&lib, |r| reference.features(queries[r].0, queries[r].1)),
    ));
    diffs
}
