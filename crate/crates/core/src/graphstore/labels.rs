use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NodeId;
use crate::error::{Error, Result};

/// Binary node label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn is_pos(self) -> bool {
        self == Label::Pos
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    /// Accepts `+1`, `1`, `-1` and `0` (mapped to negative).
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "+1" | "1" => Some(Label::Pos),
            "-1" | "0" => Some(Label::Neg),
            _ => None,
        }
    }
}

/// Partial labelings for `T >= 1` independent binary tasks over one node set.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLabels {
    node_count: usize,
    tasks: Vec<Vec<Option<Label>>>,
}

impl NodeLabels {
    pub fn new(node_count: usize, task_count: usize) -> Self {
        NodeLabels {
            node_count,
            tasks: vec![vec![None; node_count]; task_count],
        }
    }

    pub fn from_tasks(node_count: usize, tasks: Vec<Vec<Option<Label>>>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::Value("at least one task is required".into()));
        }
        if let Some(bad) = tasks.iter().find(|t| t.len() != node_count) {
            return Err(Error::Dimension {
                expected: node_count,
                actual: bad.len(),
            });
        }
        Ok(NodeLabels { node_count, tasks })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn task(&self, t: usize) -> Result<&[Option<Label>]> {
        self.tasks.get(t).map(Vec::as_slice).ok_or(Error::Range {
            what: "task id",
            value: t,
            limit: self.tasks.len(),
        })
    }

    pub fn get(&self, t: usize, node: NodeId) -> Option<Label> {
        self.tasks.get(t).and_then(|v| v.get(node as usize)).copied().flatten()
    }

    pub fn set(&mut self, t: usize, node: NodeId, label: Option<Label>) -> Result<()> {
        let limit = self.node_count;
        let task_count = self.tasks.len();
        let slot = self
            .tasks
            .get_mut(t)
            .ok_or(Error::Range {
                what: "task id",
                value: t,
                limit: task_count,
            })?
            .get_mut(node as usize)
            .ok_or(Error::Range {
                what: "node id",
                value: node as usize,
                limit,
            })?;
        *slot = label;
        Ok(())
    }

    /// Nodes labeled in at least one task, ascending.
    pub fn labeled_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count as NodeId)
            .filter(|&v| self.tasks.iter().any(|t| t[v as usize].is_some()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Train,
    Validation,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Validation => "valid",
            Role::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Role::Train),
            "valid" | "validation" => Some(Role::Validation),
            "test" => Some(Role::Test),
            _ => None,
        }
    }
}

/// Disjoint train / validation / test roles for nodes; unassigned nodes are
/// excluded from every stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    roles: Vec<Option<Role>>,
}

impl SplitAssignment {
    pub fn new(node_count: usize) -> Self {
        SplitAssignment {
            roles: vec![None; node_count],
        }
    }

    pub fn from_roles(roles: Vec<Option<Role>>) -> Self {
        SplitAssignment { roles }
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, node: NodeId) -> Option<Role> {
        self.roles.get(node as usize).copied().flatten()
    }

    pub fn set(&mut self, node: NodeId, role: Option<Role>) -> Result<()> {
        let limit = self.roles.len();
        let slot = self.roles.get_mut(node as usize).ok_or(Error::Range {
            what: "node id",
            value: node as usize,
            limit,
        })?;
        *slot = role;
        Ok(())
    }

    pub fn nodes_with(&self, role: Role) -> Vec<NodeId> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Some(role))
            .map(|(v, _)| v as NodeId)
            .collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|r| **r == Some(role)).count()
    }
}

/// Split fractions for [`make_split`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitFractions {
    pub const DEFAULT: SplitFractions = SplitFractions {
        train: 0.8,
        validation: 0.1,
        test: 0.1,
    };

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(Error::Split(format!(
                "split fractions must all be positive, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("split fractions sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Randomly partitions every labeled node (in any task) into train,
/// validation and test roles.
///
/// Counts are `round(n * train)` and `round(n * validation)` with the rest
/// going to test, adjusted so that each role receives at least one node.
/// The assignment depends only on the labeled node set and `seed`.
pub fn make_split(labels: &NodeLabels, fractions: SplitFractions, seed: u64) -> Result<SplitAssignment> {
    fractions.validate()?;
    let mut nodes = labels.labeled_nodes();
    let n = nodes.len();
    if n < 3 {
        return Err(Error::Split(format!("need at least 3 labeled nodes, found {n}")));
    }
    let mut n_train = ((n as f64) * fractions.train).round() as usize;
    let mut n_valid = ((n as f64) * fractions.validation).round() as usize;
    n_train = n_train.clamp(1, n - 2);
    n_valid = n_valid.clamp(1, n - n_train - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    nodes.shuffle(&mut rng);

    let mut split = SplitAssignment::new(labels.node_count());
    for (pos, &v) in nodes.iter().enumerate() {
        let role = if pos < n_train {
            Role::Train
        } else if pos < n_train + n_valid {
            Role::Validation
        } else {
            Role::Test
        };
        split.roles[v as usize] = Some(role);
    }
    Ok(split)
}
