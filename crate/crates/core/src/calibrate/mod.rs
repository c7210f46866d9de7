//! Logistic calibration of the intercept and per-feature weights on
//! validation nodes.

mod model;
mod optim;

pub use model::CalibratedModel;
pub use optim::{fit, logistic_objective, FitOptions, Objective};

/// Numerically stable logistic function.
pub fn sigmoid(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// `-ln sigmoid(f)` without overflow.
pub(crate) fn softplus_neg(f: f64) -> f64 {
    if f > 0.0 {
        (-f).exp().ln_1p()
    } else {
        -f + f.exp().ln_1p()
    }
}
