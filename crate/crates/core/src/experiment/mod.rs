//! Experiment configuration, data sources and the end-to-end pipeline.

mod config;
mod linkrun;
pub mod ogbn;
mod run;
mod stats;
mod synth;

pub use config::{ExperimentConfig, GraphSource, OgbnLayout, SplitSpec, TaskSelection, Version};
pub use linkrun::{run_linkpred, LinkPredConfig, LinkPredOutcome, PairSource};
pub use run::{
    load_dataset, load_source, peak_rss_bytes, run_experiment, run_on, Dataset, ExperimentOutcome, ResourceUsage,
    TaskOutcome,
};
pub use stats::{stats_command, LayerPairOverlap, LayerSummary, StatsReport};
pub use synth::{generate_synthetic, SyntheticSpec};
