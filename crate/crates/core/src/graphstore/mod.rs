//! Multiplex graph storage, labels, splits and cross-layer statistics.

mod graph;
pub mod io;
mod labels;
mod stats;

pub use graph::{Edge, GraphBuilder, Layer, MultilayerGraph, Neighbors, NodeId};
pub use io::{load_edgelist, load_labels, load_split, EdgeListFormat};
pub use labels::{make_split, Label, NodeLabels, Role, SplitAssignment, SplitFractions};
pub use stats::{degree_distribution, layer_overlap, DegreeMode};
