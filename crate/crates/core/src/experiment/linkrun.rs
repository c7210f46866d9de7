use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::GraphSource;
use super::run::{load_source, peak_rss_bytes, ResourceUsage};
use crate::binning::{AbsentLayer, BinScheme, BinSpec};
use crate::calibrate::{CalibratedModel, FitOptions};
use crate::error::{Error, Result};
use crate::graphstore::Label;
use crate::linkpred::{
    linkpred_fit_predict, load_pairs, sample_link_pairs, EndpointBins, EndpointKind, LinkSplitOptions, PairSample,
};
use crate::metrics::TaskMetrics;

/// Labeled pairs read from files, or sampled from the graph's edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairSource {
    Files {
        train: PathBuf,
        valid: PathBuf,
        test: PathBuf,
    },
    Sampled {
        #[serde(default = "default_train")]
        train: f64,
        #[serde(default = "default_held")]
        validation: f64,
        #[serde(default = "default_held")]
        test: f64,
        #[serde(default = "default_ratio")]
        negative_ratio: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_train() -> f64 {
    LinkSplitOptions::default().train
}

fn default_held() -> f64 {
    LinkSplitOptions::default().validation
}

fn default_ratio() -> f64 {
    1.0
}

fn default_reg() -> f64 {
    1e-6
}

/// A link-prediction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPredConfig {
    /// Layers whose adjacency defines neighbors (all layers when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
    #[serde(default = "default_reg")]
    pub reg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub absent_layer: AbsentLayer,
    pub graph: GraphSource,
    pub pairs: PairSource,
    /// Per-endpoint bins; plain adjacency when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub endpoint_bins: Vec<BinSpec>,
}

impl LinkPredConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: LinkPredConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if !(cfg.reg.is_finite() && cfg.reg >= 0.0) {
            return Err(Error::Config(format!(
                "reg must be finite and nonnegative, got {}",
                cfg.reg
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Test metrics and the fitted model of a link-prediction run.
#[derive(Debug, Clone)]
pub struct LinkPredOutcome {
    pub metrics: TaskMetrics,
    pub model: CalibratedModel,
    pub test: Vec<(PairSample, f64)>,
    pub resources: ResourceUsage,
}

pub fn run_linkpred(cfg: &LinkPredConfig) -> Result<LinkPredOutcome> {
    let start = Instant::now();
    let (g, _, _) = load_source(&cfg.graph).map_err(|e| e.at_stage("load"))?;
    let layers = cfg.layers.clone().unwrap_or_else(|| g.all_layer_ids());
    let (observed, train, valid, test) = match &cfg.pairs {
        PairSource::Files { train, valid, test } => {
            let n = g.node_count();
            let load = |p: &PathBuf| load_pairs(p, n).map_err(|e| e.at_stage("load"));
            (g.clone(), load(train)?, load(valid)?, load(test)?)
        }
        PairSource::Sampled {
            train,
            validation,
            test,
            negative_ratio,
            seed,
        } => {
            let opts = LinkSplitOptions {
                train: *train,
                validation: *validation,
                test: *test,
                negative_ratio: *negative_ratio,
                seed: *seed,
            };
            let s = sample_link_pairs(&g, &layers, &opts).map_err(|e| e.at_stage("split"))?;
            (s.observed, s.train, s.valid, s.test)
        }
    };
    let kind = if cfg.endpoint_bins.is_empty() {
        EndpointKind::Adjacency
    } else {
        let children = cfg
            .endpoint_bins
            .iter()
            .map(|b| b.resolve(&observed))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.at_stage("bins"))?;
        EndpointKind::Scheme(if children.len() == 1 {
            BinScheme::Single(children.into_iter().next().unwrap())
        } else {
            BinScheme::product(children, cfg.absent_layer)?
        })
    };
    let endpoints = EndpointBins::build(&observed, &layers, &kind).map_err(|e| e.at_stage("bins"))?;
    let opts = FitOptions {
        reg: cfg.reg,
        ..FitOptions::default()
    };
    let pred = linkpred_fit_predict(&endpoints, &train, &valid, &test, &opts)?;
    let labels: Vec<Label> = test.iter().map(|p| p.label).collect();
    let metrics = TaskMetrics::compute(0, &labels, &pred.test_probs).map_err(|e| e.at_stage("metrics"))?;
    Ok(LinkPredOutcome {
        metrics,
        model: pred.model,
        test: test.into_iter().zip(pred.test_probs).collect(),
        resources: ResourceUsage {
            wall_seconds: start.elapsed().as_secs_f64(),
            peak_rss_bytes: peak_rss_bytes(),
        },
    })
}
