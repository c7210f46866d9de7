use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::synth::SyntheticSpec;
use crate::binning::{AbsentLayer, BinSpec};
use crate::error::{Error, Result};
use crate::graphstore::SplitFractions;
use crate::multilayer::DEFAULT_MAX_PRODUCT_BINS;

/// Classifier variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Version {
    Baseline,
    V1,
    V2,
    V2star,
    MlV0,
    MlV1,
    MlV2,
    MlV2star,
    FriendBaseline,
}

impl Version {
    pub const ALL: [Version; 9] = [
        Version::Baseline,
        Version::V1,
        Version::V2,
        Version::V2star,
        Version::MlV0,
        Version::MlV1,
        Version::MlV2,
        Version::MlV2star,
        Version::FriendBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Version::Baseline => "baseline",
            Version::V1 => "v1",
            Version::V2 => "v2",
            Version::V2star => "v2star",
            Version::MlV0 => "ml_v0",
            Version::MlV1 => "ml_v1",
            Version::MlV2 => "ml_v2",
            Version::MlV2star => "ml_v2star",
            Version::FriendBaseline => "friend_baseline",
        }
    }

    pub fn is_multilayer(self) -> bool {
        matches!(self, Version::MlV0 | Version::MlV1 | Version::MlV2 | Version::MlV2star)
    }

    /// Whether the variant reads bin declarations.
    pub fn uses_bins(self) -> bool {
        !matches!(self, Version::Baseline | Version::FriendBaseline)
    }
}

impl FromStr for Version {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Version::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let names: Vec<_> = Version::ALL.iter().map(|v| v.name()).collect();
            Error::Config(format!("unknown version `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered task indices, written as `3`, `0-111` or `1,4,7-9`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSelection(Vec<usize>);

impl TaskSelection {
    pub fn tasks(&self) -> &[usize] {
        &self.0
    }
}

impl FromStr for TaskSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid task selection `{s}`"));
        let mut tasks = Vec::new();
        for part in s.split(',').map(str::trim) {
            match part.split_once('-') {
                Some((a, b)) => {
                    let (a, b): (usize, usize) = (
                        a.trim().parse().map_err(|_| bad())?,
                        b.trim().parse().map_err(|_| bad())?,
                    );
                    if a > b {
                        return Err(bad());
                    }
                    tasks.extend(a..=b);
                }
                None => tasks.push(part.parse().map_err(|_| bad())?),
            }
        }
        tasks.sort_unstable();
        tasks.dedup();
        Ok(TaskSelection(tasks))
    }
}

impl fmt::Display for TaskSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j + 1 < self.0.len() && self.0[j + 1] == self.0[j] + 1 {
                j += 1;
            }
            parts.push(if i == j {
                self.0[i].to_string()
            } else {
                format!("{}-{}", self.0[i], self.0[j])
            });
            i = j + 1;
        }
        f.write_str(&parts.join(","))
    }
}

impl Serialize for TaskSelection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TaskSelection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the ogbn-proteins edge features become layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OgbnLayout {
    /// One undirected layer weighted by the mean of the 8 edge features.
    #[default]
    SingleLayer,
    /// Eight undirected layers, one per edge feature.
    Multilayer,
}

/// Where the graph and labels come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// `source target [layer] [weight]` edges plus `node task label` labels.
    Edgelist {
        edges: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layer_count: Option<usize>,
        #[serde(default)]
        directed: bool,
    },
    /// The benchmark's published directory layout (`raw/`, `split/species/`).
    OgbnProteins {
        dir: PathBuf,
        #[serde(default)]
        layout: OgbnLayout,
    },
    Synthetic(SyntheticSpec),
}

/// Node split for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitSpec {
    Random {
        #[serde(default = "default_train")]
        train: f64,
        #[serde(default = "default_validation")]
        validation: f64,
        #[serde(default = "default_test")]
        test: f64,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: PathBuf,
    },
    /// The split shipped with the dataset (ogbn-proteins only).
    Provided,
}

impl Default for SplitSpec {
    fn default() -> Self {
        let f = SplitFractions::DEFAULT;
        SplitSpec::Random {
            train: f.train,
            validation: f.validation,
            test: f.test,
            seed: 0,
        }
    }
}

fn default_train() -> f64 {
    SplitFractions::DEFAULT.train
}

fn default_validation() -> f64 {
    SplitFractions::DEFAULT.validation
}

fn default_test() -> f64 {
    SplitFractions::DEFAULT.test
}

fn default_reg() -> f64 {
    1e-6
}

fn default_max_bins() -> usize {
    DEFAULT_MAX_PRODUCT_BINS
}

fn is_default_max_bins(v: &usize) -> bool {
    *v == DEFAULT_MAX_PRODUCT_BINS
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_default_absent(a: &AbsentLayer) -> bool {
    *a == AbsentLayer::default()
}

/// One reproducible experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: Version,
    /// Layers used by the baseline variants; bin declarations name their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
    #[serde(default = "default_reg")]
    pub reg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tasks: Option<TaskSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "is_default_absent")]
    pub absent_layer: AbsentLayer,
    #[serde(default = "default_max_bins", skip_serializing_if = "is_default_max_bins")]
    pub max_product_bins: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub allow_oversize: bool,
    pub graph: GraphSource,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bins: Vec<BinSpec>,
}

impl ExperimentConfig {
    pub fn new(version: Version, graph: GraphSource) -> Self {
        ExperimentConfig {
            version,
            layers: None,
            reg: default_reg(),
            tasks: None,
            output: None,
            absent_layer: AbsentLayer::default(),
            max_product_bins: default_max_bins(),
            allow_oversize: false,
            graph,
            split: SplitSpec::default(),
            bins: Vec::new(),
        }
    }

    /// Parses and validates.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg = Self::parse_toml(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without the compatibility checks of [`Self::validate`], for
    /// callers that adjust fields first.
    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg = Self::read(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file without validating it.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks version, bin and split compatibility without touching data.
    pub fn validate(&self) -> Result<()> {
        if !(self.reg.is_finite() && self.reg >= 0.0) {
            return Err(Error::Config(format!(
                "reg must be finite and nonnegative, got {}",
                self.reg
            )));
        }
        let v = self.version;
        if v.uses_bins() {
            if self.bins.is_empty() {
                return Err(Error::Config(format!(
                    "version {v} needs at least one [[bins]] declaration"
                )));
            }
            if !v.is_multilayer() && self.bins.len() != 1 {
                return Err(Error::Config(format!(
                    "version {v} is single-layer and takes exactly one [[bins]] declaration, got {}",
                    self.bins.len()
                )));
            }
            let mut layers: Vec<usize> = self.bins.iter().map(|b| b.layer).collect();
            layers.sort_unstable();
            layers.dedup();
            if layers.len() != self.bins.len() {
                return Err(Error::Config(
                    "each layer may appear in at most one [[bins]] declaration".into(),
                ));
            }
        } else if !self.bins.is_empty() {
            return Err(Error::Config(format!("version {v} does not use [[bins]] declarations")));
        }
        if let Some(l) = &self.layers {
            if l.is_empty() {
                return Err(Error::Config("layers must not be empty".into()));
            }
        }
        match (&self.split, &self.graph) {
            (SplitSpec::Provided, GraphSource::OgbnProteins { .. }) => {}
            (SplitSpec::Provided, _) => {
                return Err(Error::Config(
                    "split kind `provided` is only available for ogbn_proteins".into(),
                ))
            }
            (
                SplitSpec::Random {
                    train,
                    validation,
                    test,
                    ..
                },
                _,
            ) => SplitFractions {
                train: *train,
                validation: *validation,
                test: *test,
            }
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?,
            (SplitSpec::File { .. }, _) => {}
        }
        if let GraphSource::Synthetic(s) = &self.graph {
            s.validate()?;
        }
        if self.max_product_bins == 0 {
            return Err(Error::Config("max_product_bins must be positive".into()));
        }
        Ok(())
    }
}
