use super::model::CalibratedModel;
use super::{sigmoid, softplus_neg};
use crate::error::{Error, Result};
use crate::graphstore::Label;
use crate::nbcore::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// L2 strength on the feature weights; the intercept is unpenalized.
    pub reg: f64,
    pub max_iter: usize,
    /// Stop once the gradient's Euclidean norm is at or below this.
    pub grad_tol: f64,
    /// Largest active dimension solved with Newton steps; larger problems
    /// use L-BFGS.
    pub newton_max_dim: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            reg: 1e-6,
            max_iter: 500,
            grad_tol: 1e-8,
            newton_max_dim: 512,
        }
    }
}

/// Regularized log-loss over a fixed sample, parameterized by
/// `theta = [alpha, lambda_c for each active column c]`.
pub struct Objective<'a> {
    x: &'a FeatureMatrix,
    y: Vec<f64>,
    reg: f64,
    /// Position of each feature column in `theta` (0 means inactive).
    slot: Vec<usize>,
    active: Vec<usize>,
}

/// Objective over every column of `x` (no compaction).
pub fn logistic_objective<'a>(x: &'a FeatureMatrix, labels: &[Label], reg: f64) -> Result<Objective<'a>> {
    let active: Vec<usize> = (0..x.dim()).collect();
    Objective::new(x, labels, reg, active)
}

impl<'a> Objective<'a> {
    fn new(x: &'a FeatureMatrix, labels: &[Label], reg: f64, active: Vec<usize>) -> Result<Self> {
        if labels.len() != x.rows() {
            return Err(Error::Dimension {
                expected: x.rows(),
                actual: labels.len(),
            });
        }
        let mut slot = vec![0; x.dim()];
        for (pos, &c) in active.iter().enumerate() {
            slot[c] = pos + 1;
        }
        Ok(Objective {
            x,
            y: labels.iter().map(|l| if l.is_pos() { 1.0 } else { 0.0 }).collect(),
            reg,
            slot,
            active,
        })
    }

    pub fn dim(&self) -> usize {
        self.active.len() + 1
    }

    fn margin(&self, theta: &[f64], r: usize) -> f64 {
        let row = self.x.row(r);
        let mut f = theta[0];
        for (c, v) in row.iter() {
            let s = self.slot[c];
            if s != 0 {
                f += theta[s] * v;
            }
        }
        f
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        let mut l = 0.0;
        for r in 0..self.x.rows() {
            let f = self.margin(theta, r);
            l += if self.y[r] > 0.5 {
                softplus_neg(f)
            } else {
                softplus_neg(-f)
            };
        }
        l + self.reg * theta[1..].iter().map(|t| t * t).sum::<f64>()
    }

    /// Loss and gradient with respect to `theta`.
    pub fn loss_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; theta.len()];
        let mut l = 0.0;
        for r in 0..self.x.rows() {
            let f = self.margin(theta, r);
            l += if self.y[r] > 0.5 {
                softplus_neg(f)
            } else {
                softplus_neg(-f)
            };
            let resid = sigmoid(f) - self.y[r];
            grad[0] += resid;
            for (c, v) in self.x.row(r).iter() {
                let s = self.slot[c];
                if s != 0 {
                    grad[s] += resid * v;
                }
            }
        }
        for k in 1..theta.len() {
            l += self.reg * theta[k] * theta[k];
            grad[k] += 2.0 * self.reg * theta[k];
        }
        (l, grad)
    }

    /// Dense Hessian, row-major.
    fn hessian(&self, theta: &[f64]) -> Vec<f64> {
        let d = theta.len();
        let mut h = vec![0.0; d * d];
        let mut idx: Vec<(usize, f64)> = Vec::new();
        for r in 0..self.x.rows() {
            let p = sigmoid(self.margin(theta, r));
            let w = p * (1.0 - p);
            if w == 0.0 {
                continue;
            }
            idx.clear();
            idx.push((0, 1.0));
            for (c, v) in self.x.row(r).iter() {
                let s = self.slot[c];
                if s != 0 {
                    idx.push((s, v));
                }
            }
            for &(a, va) in &idx {
                for &(b, vb) in &idx {
                    h[a * d + b] += w * va * vb;
                }
            }
        }
        for k in 1..d {
            h[k * d + k] += 2.0 * self.reg;
        }
        h
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `h x = g` for symmetric positive definite `h` by Cholesky.
/// Returns `None` if `h` is not numerically positive definite.
fn cholesky_solve(h: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let d = g.len();
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = h[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    let mut z = vec![0.0; d];
    for i in 0..d {
        let mut s = g[i];
        for k in 0..i {
            s -= l[i * d + k] * z[k];
        }
        z[i] = s / l[i * d + i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let mut s = z[i];
        for k in i + 1..d {
            s -= l[k * d + i] * x[k];
        }
        x[i] = s / l[i * d + i];
    }
    Some(x)
}

/// Backtracking line search along `dir`; accepts only strict decrease.
fn line_search(obj: &Objective<'_>, theta: &[f64], loss: f64, grad: &[f64], dir: &[f64]) -> Option<(Vec<f64>, f64)> {
    let slope = dot(grad, dir);
    if !(slope < 0.0) {
        return None;
    }
    let mut step = 1.0;
    for _ in 0..60 {
        let cand: Vec<f64> = theta.iter().zip(dir).map(|(t, d)| t + step * d).collect();
        let l = obj.loss(&cand);
        if l.is_finite() && l <= loss + 1e-4 * step * slope && l < loss {
            return Some((cand, l));
        }
        step *= 0.5;
    }
    None
}

struct Outcome {
    theta: Vec<f64>,
    loss: f64,
    grad_norm: f64,
    iterations: usize,
}

fn newton(obj: &Objective<'_>, opts: &FitOptions) -> Outcome {
    let mut theta = vec![0.0; obj.dim()];
    let (mut loss, mut grad) = obj.loss_grad(&theta);
    let mut iterations = 0;
    while iterations < opts.max_iter && norm(&grad) > opts.grad_tol {
        let mut h = obj.hessian(&theta);
        let d = theta.len();
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut damping = 0.0;
        let dir = loop {
            if let Some(x) = cholesky_solve(&h, &neg) {
                break Some(x);
            }
            let add = if damping == 0.0 { 1e-10 } else { damping * 9.0 };
            damping += add;
            if damping > 1e10 {
                break None;
            }
            for k in 0..d {
                h[k * d + k] += add;
            }
        };
        let Some(dir) = dir else { break };
        let Some((next, l)) = line_search(obj, &theta, loss, &grad, &dir) else {
            break;
        };
        theta = next;
        iterations += 1;
        let (l2, g2) = obj.loss_grad(&theta);
        debug_assert!((l2 - l).abs() <= 1e-9 * l.abs().max(1.0));
        loss = l2;
        grad = g2;
    }
    Outcome {
        grad_norm: norm(&grad),
        theta,
        loss,
        iterations,
    }
}

fn lbfgs(obj: &Objective<'_>, opts: &FitOptions) -> Outcome {
    const MEMORY: usize = 10;
    let mut theta = vec![0.0; obj.dim()];
    let (mut loss, mut grad) = obj.loss_grad(&theta);
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut iterations = 0;
    while iterations < opts.max_iter && norm(&grad) > opts.grad_tol {
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = hist
            .last()
            .map_or(1.0 / norm(&grad).max(1.0), |(s, y, _)| dot(s, y) / dot(y, y));
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        if dot(&dir, &grad) >= 0.0 {
            hist.clear();
            dir = grad.iter().map(|g| -g / norm(&grad).max(1.0)).collect();
        }
        let Some((next, _)) = line_search(obj, &theta, loss, &grad, &dir) else {
            if hist.is_empty() {
                break;
            }
            hist.clear();
            continue;
        };
        let (l2, g2) = obj.loss_grad(&next);
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g2.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if hist.len() == MEMORY {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        theta = next;
        loss = l2;
        grad = g2;
        iterations += 1;
    }
    Outcome {
        grad_norm: norm(&grad),
        theta,
        loss,
        iterations,
    }
}

/// Fits `sigmoid(alpha + lambda . x)` to `labels` by minimizing
/// `sum log-loss + reg * |lambda|^2`. Columns with no nonzero value in `x`
/// keep `lambda = 0`.
pub fn fit(x: &FeatureMatrix, labels: &[Label], opts: &FitOptions) -> Result<CalibratedModel> {
    if !(opts.reg >= 0.0) || !opts.reg.is_finite() {
        return Err(Error::Value(format!(
            "regularization must be finite and nonnegative, got {}",
            opts.reg
        )));
    }
    let pos = labels.iter().filter(|l| l.is_pos()).count();
    if labels.len() < 2 || pos == 0 || pos == labels.len() {
        return Err(Error::Split(format!(
            "calibration needs both classes among at least 2 validation nodes (got {} nodes, {} positive); \
             choose a different split seed or larger validation fraction",
            labels.len(),
            pos
        )));
    }
    let mut used = vec![false; x.dim()];
    for r in 0..x.rows() {
        for (c, v) in x.row(r).iter() {
            if !v.is_finite() {
                return Err(Error::Numeric(format!("non-finite feature in row {r}, column {c}")));
            }
            used[c] = true;
        }
    }
    let active: Vec<usize> = (0..x.dim()).filter(|&c| used[c]).collect();
    let obj = Objective::new(x, labels, opts.reg, active)?;
    let out = if obj.dim() <= opts.newton_max_dim {
        newton(&obj, opts)
    } else {
        lbfgs(&obj, opts)
    };
    if !out.loss.is_finite() {
        return Err(Error::Numeric("calibration loss is not finite".into()));
    }
    let mut lambda = vec![0.0; x.dim()];
    for (pos, &c) in obj.active.iter().enumerate() {
        lambda[c] = out.theta[pos + 1];
    }
    let labels = (0..x.dim()).map(|c| x.space().label(c)).collect();
    Ok(CalibratedModel {
        alpha: out.theta[0],
        lambda,
        reg: opts.reg,
        iterations: out.iterations,
        final_loss: out.loss,
        grad_norm: out.grad_norm,
        labels,
        fingerprint: None,
    })
}
