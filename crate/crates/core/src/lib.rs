pub mod binning;
pub mod calibrate;
pub mod error;
pub mod experiment;
pub mod graphstore;
pub mod linkpred;
pub mod metrics;
pub mod multilayer;
pub mod nbcore;

pub use error::{Error, Result};
