use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{normalized_entropy, percent_ne_change, roc_auc};
use crate::error::Result;
use crate::graphstore::Label;

/// Test-set metrics of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub task: usize,
    pub ne: f64,
    pub roc_auc: f64,
    pub n: usize,
    /// Positive rate among the evaluated samples.
    pub p: f64,
    /// Percent NE change against the report's reference model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ne_change_pct: Option<f64>,
}

impl TaskMetrics {
    pub fn compute(task: usize, labels: &[Label], probs: &[f64]) -> Result<Self> {
        let n = labels.len();
        let pos = labels.iter().filter(|l| l.is_pos()).count();
        Ok(TaskMetrics {
            task,
            ne: normalized_entropy(labels, probs)?,
            roc_auc: roc_auc(labels, probs)?,
            n,
            p: pos as f64 / n as f64,
            ne_change_pct: None,
        })
    }
}

/// Per-task metrics of one model with aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub tasks: Vec<TaskMetrics>,
    pub mean_roc_auc: f64,
    pub mean_ne: f64,
    /// Name of the model NE changes are measured against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_ne_change_pct: Option<f64>,
}

impl EvalReport {
    pub fn new(model: impl Into<String>, tasks: Vec<TaskMetrics>) -> Self {
        let k = tasks.len().max(1) as f64;
        let mean_roc_auc = tasks.iter().map(|t| t.roc_auc).sum::<f64>() / k;
        let mean_ne = tasks.iter().map(|t| t.ne).sum::<f64>() / k;
        EvalReport {
            model: model.into(),
            tasks,
            mean_roc_auc,
            mean_ne,
            reference: None,
            mean_ne_change_pct: None,
        }
    }

    /// Fills NE changes relative to `reference`, matching tasks by id.
    /// Tasks missing from the reference keep no change value.
    pub fn with_reference(mut self, reference: &EvalReport) -> Self {
        let mut changes = Vec::new();
        for t in &mut self.tasks {
            if let Some(r) = reference.tasks.iter().find(|r| r.task == t.task) {
                let c = percent_ne_change(t.ne, r.ne);
                t.ne_change_pct = Some(c);
                changes.push(c);
            }
        }
        self.reference = Some(reference.model.clone());
        self.mean_ne_change_pct = (!changes.is_empty()).then(|| changes.iter().sum::<f64>() / changes.len() as f64);
        self
    }

    pub fn roc_aucs(&self) -> Vec<f64> {
        self.tasks.iter().map(|t| t.roc_auc).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table with one row per task and a mean row.
    pub fn to_table(&self) -> String {
        let with_change = self.reference.is_some();
        let mut s = String::new();
        let _ = write!(s, "{:>6} {:>10} {:>10} {:>8} {:>8}", "task", "NE", "ROC-AUC", "n", "p");
        if with_change {
            let _ = write!(s, " {:>10}", "dNE%");
        }
        s.push('\n');
        for t in &self.tasks {
            let _ = write!(
                s,
                "{:>6} {:>10.5} {:>10.5} {:>8} {:>8.4}",
                t.task, t.ne, t.roc_auc, t.n, t.p
            );
            if with_change {
                match t.ne_change_pct {
                    Some(c) => {
                        let _ = write!(s, " {:>+10.3}", c);
                    }
                    None => {
                        let _ = write!(s, " {:>10}", "-");
                    }
                }
            }
            s.push('\n');
        }
        let _ = write!(
            s,
            "{:>6} {:>10.5} {:>10.5} {:>8} {:>8}",
            "mean", self.mean_ne, self.mean_roc_auc, "", ""
        );
        if let Some(c) = self.mean_ne_change_pct {
            let _ = write!(s, " {:>+10.3}", c);
        }
        s.push('\n');
        s
    }
}
