use std::fmt::Write as _;

use super::sigmoid;
use crate::error::{Error, Result};
use crate::nbcore::{FeatureMatrix, FeatureRow};

const FORMAT_HEADER: &str = "linknb-model 1";

/// Intercept and per-feature weights of a fitted logistic calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedModel {
    pub alpha: f64,
    pub lambda: Vec<f64>,
    pub reg: f64,
    pub iterations: usize,
    pub final_loss: f64,
    pub grad_norm: f64,
    /// One label per feature column.
    pub labels: Vec<String>,
    /// Fingerprint of the bin scheme the features were built with.
    pub fingerprint: Option<String>,
}

impl CalibratedModel {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.fingerprint = Some(fingerprint.into());
        self
    }

    pub fn score_row(&self, row: FeatureRow<'_>) -> f64 {
        self.alpha + row.dot(&self.lambda)
    }

    /// `sigmoid(alpha + lambda . x)` for every row.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok((0..x.rows()).map(|r| sigmoid(self.score_row(x.row(r)))).collect())
    }

    /// Probability for one dense feature vector.
    pub fn predict_dense(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(sigmoid(
            self.alpha + x.iter().zip(&self.lambda).map(|(a, b)| a * b).sum::<f64>(),
        ))
    }

    /// Line-oriented text form. Only nonzero weights are listed.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_HEADER}");
        let _ = writeln!(s, "fingerprint {}", self.fingerprint.as_deref().unwrap_or("-"));
        let _ = writeln!(s, "dim {}", self.dim());
        let _ = writeln!(s, "reg {}", self.reg);
        let _ = writeln!(s, "iterations {}", self.iterations);
        let _ = writeln!(s, "final_loss {}", self.final_loss);
        let _ = writeln!(s, "grad_norm {}", self.grad_norm);
        let _ = writeln!(s, "alpha {}", self.alpha);
        for (c, &l) in self.lambda.iter().enumerate() {
            if l != 0.0 {
                let label = self.labels.get(c).map_or("-", String::as_str);
                let _ = writeln!(s, "lambda {c} {l} {label}");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse {
            path: "<model>".into(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == FORMAT_HEADER => {}
            _ => return Err(bad(1, format!("expected header `{FORMAT_HEADER}`"))),
        }
        let mut fingerprint = None;
        let mut dim = None;
        let (mut reg, mut iterations, mut final_loss, mut grad_norm, mut alpha) = (0.0, 0, f64::NAN, f64::NAN, None);
        let mut entries = Vec::new();
        for (idx, line) in lines {
            let n = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').ok_or_else(|| bad(n, "missing value".into()))?;
            let float = |v: &str| v.trim().parse::<f64>().map_err(|e| bad(n, format!("{key}: {e}")));
            match key {
                "fingerprint" => fingerprint = (rest != "-").then(|| rest.to_string()),
                "dim" => dim = Some(rest.parse::<usize>().map_err(|e| bad(n, format!("dim: {e}")))?),
                "reg" => reg = float(rest)?,
                "iterations" => iterations = rest.parse().map_err(|e| bad(n, format!("iterations: {e}")))?,
                "final_loss" => final_loss = float(rest)?,
                "grad_norm" => grad_norm = float(rest)?,
                "alpha" => alpha = Some(float(rest)?),
                "lambda" => {
                    let mut parts = rest.splitn(3, ' ');
                    let col = parts
                        .next()
                        .and_then(|c| c.parse::<usize>().ok())
                        .ok_or_else(|| bad(n, "lambda: bad column".into()))?;
                    let val = float(parts.next().unwrap_or(""))?;
                    let label = parts.next().unwrap_or("-").to_string();
                    entries.push((n, col, val, label));
                }
                other => return Err(bad(n, format!("unknown key `{other}`"))),
            }
        }
        let dim = dim.ok_or_else(|| bad(0, "missing dim".into()))?;
        let alpha = alpha.ok_or_else(|| bad(0, "missing alpha".into()))?;
        let mut lambda = vec![0.0; dim];
        let mut labels = vec![String::from("-"); dim];
        for (n, col, val, label) in entries {
            if col >= dim {
                return Err(bad(n, format!("lambda column {col} outside dim {dim}")));
            }
            lambda[col] = val;
            labels[col] = label;
        }
        Ok(CalibratedModel {
            alpha,
            lambda,
            reg,
            iterations,
            final_loss,
            grad_norm,
            labels,
            fingerprint,
        })
    }
}
