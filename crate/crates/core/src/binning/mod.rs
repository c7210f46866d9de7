//! Mutually exclusive edge bins by direction, weight, or cross-layer product.

mod assignment;
mod primitives;
mod scheme;

pub use assignment::{build_assignment, AssignmentRow, BinAssignment};
pub use primitives::{
    assign_direction_bin, assign_product_bin, assign_weight_bin, decode_product_bin, percentile_thresholds,
    DirectionBin,
};
pub use scheme::{AbsentLayer, BinKindName, BinScheme, BinSpec, LayerBinKind, LayerRelation, LayerScheme};
