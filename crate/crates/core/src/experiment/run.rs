use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GraphSource, SplitSpec, Version};
use super::ogbn::{load_ogbn_graph, load_ogbn_labels, load_ogbn_split};
use super::synth::generate_synthetic;
use crate::binning::{build_assignment, AbsentLayer, BinAssignment, BinScheme, LayerBinKind, LayerScheme};
use crate::calibrate::{fit, CalibratedModel, FitOptions};
use crate::error::{Error, Result};
use crate::graphstore::{
    load_edgelist, load_labels, load_split, make_split, EdgeListFormat, Label, MultilayerGraph, NodeId, NodeLabels,
    Role, SplitAssignment, SplitFractions,
};
use crate::metrics::{EvalReport, TaskMetrics};
use crate::multilayer::{features_ml_v0, features_ml_v1, features_ml_v2, features_ml_v2star, PerLayerCounts};
use crate::nbcore::{
    accumulate_counts_from, features_baseline, features_v1, features_v2, features_v2star, friend_conversion_baseline,
    FeatureMatrix, TrainLabels,
};

/// Graph, labels and split of an experiment.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: MultilayerGraph,
    pub labels: NodeLabels,
    pub split: SplitAssignment,
}

/// Graph, labels (empty when the source has none) and any split shipped
/// with the source.
pub fn load_source(source: &GraphSource) -> Result<(MultilayerGraph, NodeLabels, Option<SplitAssignment>)> {
    Ok(match source {
        GraphSource::Edgelist {
            edges,
            labels,
            nodes,
            layer_count,
            directed,
        } => {
            let format = EdgeListFormat {
                node_count: *nodes,
                layer_count: *layer_count,
                directed: *directed,
            };
            let g = load_edgelist(edges, &format)?;
            let l = match labels {
                Some(path) => load_labels(path, g.node_count())?,
                None => NodeLabels::new(g.node_count(), 0),
            };
            (g, l, None)
        }
        GraphSource::OgbnProteins { dir, layout } => {
            let l = load_ogbn_labels(dir)?;
            let g = load_ogbn_graph(dir, l.node_count(), *layout)?;
            let s = load_ogbn_split(dir, l.node_count())?;
            (g, l, Some(s))
        }
        GraphSource::Synthetic(spec) => {
            let (g, l) = generate_synthetic(spec)?;
            (g, l, None)
        }
    })
}

/// Loads the configured graph and labels and resolves the split.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let (graph, labels, provided) = load_source(&cfg.graph)?;
    let split = match (&cfg.split, provided) {
        (SplitSpec::Provided, Some(s)) => s,
        (SplitSpec::Provided, None) => {
            return Err(Error::Config("this graph source ships no split".into()));
        }
        (SplitSpec::File { path }, _) => load_split(path, graph.node_count())?,
        (
            SplitSpec::Random {
                train,
                validation,
                test,
                seed,
            },
            _,
        ) => make_split(
            &labels,
            SplitFractions {
                train: *train,
                validation: *validation,
                test: *test,
            },
            *seed,
        )?,
    };
    Ok(Dataset { graph, labels, split })
}

/// Label-independent state shared by all tasks.
enum Plan {
    Baseline {
        bins: BinAssignment,
    },
    Single {
        scheme: BinScheme,
        bins: BinAssignment,
    },
    LayerBlocks {
        layers: Vec<usize>,
        schemes: Vec<BinScheme>,
        bins: Vec<BinAssignment>,
    },
    Product {
        layers: Vec<usize>,
        scheme: BinScheme,
        bins: BinAssignment,
    },
    Friend {
        layers: Vec<usize>,
    },
}

impl Plan {
    fn fingerprint(&self) -> Option<String> {
        match self {
            Plan::Single { scheme, .. } | Plan::Product { scheme, .. } => Some(scheme.fingerprint()),
            Plan::LayerBlocks { schemes, .. } => {
                Some(schemes.iter().map(BinScheme::fingerprint).collect::<Vec<_>>().join("+"))
            }
            Plan::Baseline { .. } | Plan::Friend { .. } => None,
        }
    }
}

fn baseline_layers(cfg: &ExperimentConfig, g: &MultilayerGraph) -> Result<Vec<usize>> {
    let layers = cfg.layers.clone().unwrap_or_else(|| g.all_layer_ids());
    for &k in &layers {
        g.layer(k)?;
    }
    Ok(layers)
}

/// Single-bin scheme whose rows are the union neighborhoods of `layers`.
fn adjacency_scheme(g: &MultilayerGraph, layers: &[usize]) -> Result<BinScheme> {
    let children = layers
        .iter()
        .map(|&k| LayerScheme::new(k, LayerBinKind::WeightThresholds { thresholds: Vec::new() }, true))
        .collect::<Result<Vec<_>>>()?;
    let scheme = if children.len() == 1 {
        BinScheme::Single(children.into_iter().next().unwrap())
    } else {
        BinScheme::product(children, AbsentLayer::Category)?
    };
    scheme.validate(g)?;
    Ok(scheme)
}

fn plan(cfg: &ExperimentConfig, g: &MultilayerGraph) -> Result<Plan> {
    let v = cfg.version;
    match v {
        Version::Baseline => {
            let layers = baseline_layers(cfg, g)?;
            Ok(Plan::Baseline {
                bins: build_assignment(g, &adjacency_scheme(g, &layers)?)?,
            })
        }
        Version::FriendBaseline => Ok(Plan::Friend {
            layers: baseline_layers(cfg, g)?,
        }),
        _ => {
            let children = cfg.bins.iter().map(|b| b.resolve(g)).collect::<Result<Vec<_>>>()?;
            let layers: Vec<usize> = children.iter().map(|c| c.layer).collect();
            match v {
                Version::V1 | Version::V2 | Version::V2star => {
                    let scheme = BinScheme::Single(children.into_iter().next().unwrap());
                    let bins = build_assignment(g, &scheme)?;
                    Ok(Plan::Single { scheme, bins })
                }
                Version::MlV0 => {
                    let schemes: Vec<BinScheme> = children.into_iter().map(BinScheme::Single).collect();
                    let bins = schemes
                        .iter()
                        .map(|s| build_assignment(g, s))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Plan::LayerBlocks { layers, schemes, bins })
                }
                _ => {
                    let scheme = BinScheme::product(children, cfg.absent_layer)?;
                    if v == Version::MlV2star && scheme.bin_count() > cfg.max_product_bins && !cfg.allow_oversize {
                        return Err(Error::Config(format!(
                            "{} product bins exceed max_product_bins = {}; reduce per-layer bins, set \
                             absent_layer = \"exclude\", or set allow_oversize = true",
                            scheme.bin_count(),
                            cfg.max_product_bins
                        )));
                    }
                    let bins = build_assignment(g, &scheme)?;
                    Ok(Plan::Product { layers, scheme, bins })
                }
            }
        }
    }
}

fn task_nodes(labels: &[Option<Label>], split: &SplitAssignment, role: Role) -> Vec<NodeId> {
    (0..labels.len() as NodeId)
        .filter(|&v| labels[v as usize].is_some() && split.role(v) == Some(role))
        .collect()
}

fn featurize(
    cfg: &ExperimentConfig,
    plan: &Plan,
    g: &MultilayerGraph,
    train: &TrainLabels,
    targets: &[NodeId],
) -> Result<FeatureMatrix> {
    match plan {
        Plan::Baseline { bins } => {
            let counts = accumulate_counts_from(g, bins, train)?;
            features_baseline(&counts, bins, targets)
        }
        Plan::Single { scheme, bins } => {
            let counts = accumulate_counts_from(g, bins, train)?;
            match cfg.version {
                Version::V1 => features_v1(&counts, bins, scheme, targets),
                Version::V2 => features_v2(&counts, bins, scheme, targets),
                _ => features_v2star(&counts, bins, scheme, targets),
            }
        }
        Plan::LayerBlocks { layers, schemes, bins } => {
            let counts = PerLayerCounts::accumulate(g, layers, None, train)?;
            features_ml_v0(&counts, bins, schemes, targets)
        }
        Plan::Product { layers, scheme, bins } => {
            let product = (cfg.version != Version::MlV1).then_some(bins);
            let counts = PerLayerCounts::accumulate(g, layers, product, train)?;
            match cfg.version {
                Version::MlV1 => features_ml_v1(&counts, bins, scheme, targets),
                Version::MlV2 => features_ml_v2(&counts, bins, scheme, targets),
                _ => features_ml_v2star(&counts, bins, scheme, targets, cfg.max_product_bins, cfg.allow_oversize),
            }
        }
        Plan::Friend { .. } => unreachable!("friend baseline has no features"),
    }
}

/// Outcome of one task.
#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub metrics: TaskMetrics,
    pub model: Option<CalibratedModel>,
    /// Test nodes with their predicted probabilities.
    pub predictions: Vec<(NodeId, f64)>,
}

fn run_task(cfg: &ExperimentConfig, plan: &Plan, data: &Dataset, task: usize) -> Result<TaskOutcome> {
    let stage = |s: &'static str| move |e: Error| e.at_stage(s);
    let train = TrainLabels::new(&data.labels, &data.split, task).map_err(stage("counts"))?;
    let task_labels = data.labels.task(task)?;
    let valid = task_nodes(task_labels, &data.split, Role::Validation);
    let test = task_nodes(task_labels, &data.split, Role::Test);
    let label_of = |v: &NodeId| task_labels[*v as usize].expect("filtered to labeled nodes");
    let test_labels: Vec<Label> = test.iter().map(label_of).collect();

    let (probs, model) = if let Plan::Friend { layers } = plan {
        let rates = friend_conversion_baseline(&data.graph, layers, &train).map_err(stage("features"))?;
        (test.iter().map(|&v| rates[v as usize]).collect::<Vec<_>>(), None)
    } else {
        let mut targets = valid.clone();
        targets.extend_from_slice(&test);
        let x = featurize(cfg, plan, &data.graph, &train, &targets).map_err(stage("features"))?;
        let valid_rows: Vec<usize> = (0..valid.len()).collect();
        let test_rows: Vec<usize> = (valid.len()..targets.len()).collect();
        let valid_labels: Vec<Label> = valid.iter().map(label_of).collect();
        let opts = FitOptions {
            reg: cfg.reg,
            ..FitOptions::default()
        };
        let mut model = fit(&x.select(&valid_rows), &valid_labels, &opts).map_err(stage("calibration"))?;
        if let Some(fp) = plan.fingerprint() {
            model = model.with_fingerprint(fp);
        }
        let probs = model.predict(&x.select(&test_rows)).map_err(stage("prediction"))?;
        (probs, Some(model))
    };
    let metrics = TaskMetrics::compute(task, &test_labels, &probs).map_err(stage("metrics"))?;
    Ok(TaskOutcome {
        metrics,
        model,
        predictions: test.into_iter().zip(probs).collect(),
    })
}

/// Wall-clock time and peak resident memory of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceUsage {
    pub wall_seconds: f64,
    /// Peak resident set size in bytes, when the platform reports it.
    pub peak_rss_bytes: Option<u64>,
}

/// Peak resident set size of this process (Linux only).
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Everything a run produces. The report is a pure function of the config;
/// resource usage is kept beside it.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: EvalReport,
    pub tasks: Vec<TaskOutcome>,
    pub resources: ResourceUsage,
}

/// Runs the configured experiment on already-loaded data.
pub fn run_on(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    cfg.validate()?;
    if data.labels.task_count() == 0 {
        return Err(Error::Config("the graph source provides no node labels".into()));
    }
    let plan = plan(cfg, &data.graph).map_err(|e| e.at_stage("bins"))?;
    let tasks: Vec<usize> = match &cfg.tasks {
        Some(sel) => sel.tasks().to_vec(),
        None => (0..data.labels.task_count()).collect(),
    };
    if let Some(&t) = tasks.iter().find(|&&t| t >= data.labels.task_count()) {
        return Err(Error::Range {
            what: "task",
            value: t,
            limit: data.labels.task_count(),
        });
    }
    let outcomes = tasks
        .par_iter()
        .map(|&t| {
            run_task(cfg, &plan, data, t).map_err(|e| Error::Task {
                task: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EvalReport::new(cfg.version.name(), outcomes.iter().map(|o| o.metrics.clone()).collect());
    Ok(ExperimentOutcome {
        report,
        tasks: outcomes,
        resources: ResourceUsage {
            wall_seconds: start.elapsed().as_secs_f64(),
            peak_rss_bytes: peak_rss_bytes(),
        },
    })
}

/// Loads data and runs the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    cfg.validate()?;
    let data = load_dataset(cfg).map_err(|e| e.at_stage("load"))?;
    let mut out = run_on(cfg, &data)?;
    out.resources.wall_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}
