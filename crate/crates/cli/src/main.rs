use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use linknb::experiment::{
    generate_synthetic, load_source, run_experiment, run_linkpred, stats_command, ExperimentConfig, GraphSource,
    LinkPredConfig, PairSource, SplitSpec, SyntheticSpec, TaskSelection, Version,
};
use linknb::graphstore::io::{write_edgelist, write_labels, write_split};
use linknb::graphstore::{load_labels, make_split, SplitFractions};
use linknb::Error;

#[derive(Parser)]
#[command(
    name = "linknb",
    version,
    about = "Edge-binned Naive Bayes classifiers for multilayer graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's classifier version.
    #[arg(long)]
    version: Option<Version>,
    /// Overrides the task selection, e.g. `0-111` or `1,4,7-9`.
    #[arg(long)]
    tasks: Option<TaskSelection>,
    /// Overrides the random split seed (and the synthetic graph seed).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Layer sizes, degree histograms and layer overlaps.
    Stats {
        /// Read the graph section of an experiment config.
        #[arg(long, conflicts_with = "edges")]
        config: Option<PathBuf>,
        /// Edge list (`source target layer [weight]`).
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        directed: bool,
        /// Layer pairs to compare, e.g. `0:1,0:2`; all pairs by default.
        #[arg(long)]
        pairs: Option<String>,
        /// Write the structured report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random train/validation/test split of labeled nodes.
    Split {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        nodes: usize,
        /// Train, validation and test fractions.
        #[arg(long, default_value = "0.8,0.1,0.1")]
        fractions: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit per-task models and write them, with the report, to a directory.
    Train(RunArgs),
    /// Run an experiment and print its report.
    Eval(RunArgs),
    /// Link prediction from a link config (TOML).
    Linkpred {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the pair sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic graph and labels described by a TOML spec.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for `edges.txt` and `labels.txt`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::read(&args.config)?;
    if let Some(v) = args.version {
        cfg.version = v;
    }
    if let Some(t) = &args.tasks {
        cfg.tasks = Some(t.clone());
    }
    if let Some(seed) = args.seed {
        if let SplitSpec::Random { seed: s, .. } = &mut cfg.split {
            *s = seed;
        }
        if let GraphSource::Synthetic(spec) = &mut cfg.graph {
            spec.seed = seed;
        }
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs, write_models: bool) -> Result<()> {
    let cfg = load_config(args)?;
    let outcome = run_experiment(&cfg)?;
    print!("{}", outcome.report.to_table());
    let usage = serde_json::to_string_pretty(&outcome.resources)?;
    eprintln!(
        "wall {:.3}s, peak rss {}",
        outcome.resources.wall_seconds,
        outcome
            .resources
            .peak_rss_bytes
            .map_or("n/a".to_string(), |b| format!("{:.1} MiB", b as f64 / 1048576.0))
    );
    if write_models {
        let dir = cfg
            .output
            .clone()
            .context("train needs --out DIR or `output` in the config")?;
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for task in &outcome.tasks {
            if let Some(m) = &task.model {
                write_file(&dir.join(format!("task_{}.model", task.metrics.task)), &m.to_text())?;
            }
        }
        write_file(&dir.join("report.json"), &outcome.report.to_json())?;
        write_file(&dir.join("resources.json"), &usage)?;
        write_file(&dir.join("config.toml"), &cfg.to_toml())?;
    } else if let Some(out) = &cfg.output {
        write_file(out, &outcome.report.to_json())?;
        write_file(&sidecar(out, ".resources.json"), &usage)?;
    }
    Ok(())
}

fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .with_context(|| format!("layer pair `{p}` is not `a:b`"))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats {
            config,
            edges,
            nodes,
            directed,
            pairs,
            out,
        } => {
            let source = match (config, edges) {
                (Some(c), _) => ExperimentConfig::load(c)?.graph,
                (None, Some(e)) => GraphSource::Edgelist {
                    edges: e,
                    labels: None,
                    nodes,
                    layer_count: None,
                    directed,
                },
                (None, None) => bail!(Error::Config("stats needs --config or --edges".into())),
            };
            let (g, _, _) = load_source(&source)?;
            let pairs = pairs
                .as_deref()
                .map(parse_pairs)
                .transpose()
                .map_err(|e| Error::Config(e.to_string()))?;
            let report = stats_command(&g, pairs.as_deref().unwrap_or(&[]))?;
            print!("{}", report.to_text());
            if let Some(out) = out {
                write_file(&out, &report.to_json())?;
            }
        }
        Command::Split {
            labels,
            nodes,
            fractions,
            seed,
            out,
        } => {
            let parts: Vec<f64> = fractions
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("fractions: {e}")))?;
            if parts.len() != 3 {
                bail!(Error::Config("fractions take three comma-separated values".into()));
            }
            let l = load_labels(&labels, nodes)?;
            let fr = SplitFractions {
                train: parts[0],
                validation: parts[1],
                test: parts[2],
            };
            let split = make_split(&l, fr, seed)?;
            let mut buf = Vec::new();
            write_split(&split, &mut buf)?;
            write_file(&out, &String::from_utf8(buf)?)?;
        }
        Command::Train(args) => run(&args, true)?,
        Command::Eval(args) => run(&args, false)?,
        Command::Linkpred { config, seed, out } => {
            let mut cfg = LinkPredConfig::load(&config)?;
            if let (Some(s), PairSource::Sampled { seed, .. }) = (seed, &mut cfg.pairs) {
                *seed = s;
            }
            if out.is_some() {
                cfg.output = out;
            }
            let o = run_linkpred(&cfg)?;
            println!(
                "pairs {}  NE {:.5}  ROC-AUC {:.5}  p {:.4}",
                o.metrics.n, o.metrics.ne, o.metrics.roc_auc, o.metrics.p
            );
            if let Some(out) = &cfg.output {
                let mut text = String::from("# z1 z2 label probability\n");
                for (p, prob) in &o.test {
                    text.push_str(&format!("{} {} {} {}\n", p.z1, p.z2, p.label.sign(), prob));
                }
                write_file(out, &text)?;
                write_file(&sidecar(out, ".model"), &o.model.to_text())?;
            }
        }
        Command::Synth { config, seed, out } => {
            let mut spec = SyntheticSpec::load(&config)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let (g, labels) = generate_synthetic(&spec)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut edges = fs::File::create(out.join("edges.txt"))?;
            write_edgelist(&g, &mut edges)?;
            edges.flush()?;
            let mut lf = fs::File::create(out.join("labels.txt"))?;
            write_labels(&labels, &mut lf)?;
            println!(
                "{} nodes, {} layers, {} edges",
                g.node_count(),
                g.layer_count(),
                g.edge_count()
            );
        }
    }
    Ok(())
}

/// 2: configuration, 3: data, 4: numeric failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::root) {
        Some(Error::Config(_) | Error::Scheme(_) | Error::Mode(_)) => 2,
        Some(Error::Numeric(_)) => 4,
        Some(_) => 3,
        None if err.downcast_ref::<std::io::Error>().is_some() => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
