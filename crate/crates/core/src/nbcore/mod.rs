//! Naive Bayes count statistics, one-hop scores and two-hop feature
//! aggregation for single-layer graphs.

mod counts;
mod features;
mod friend;
mod scores;

pub(crate) use counts::BinCountsBuilder;
pub use counts::{accumulate_counts, accumulate_counts_from, BinCounts, DegreeCounts, NbCounts, TrainLabels};
pub(crate) use features::{binned_by_bin, binned_pairs, build_rows, degree_scores, scalar_by_bin, BinScorer};
pub use features::{
    features_baseline, features_v1, features_v2, features_v2star, FeatureMatrix, FeatureRow, FeatureSpace,
};
pub use friend::{friend_conversion_all_layers, friend_conversion_baseline};
pub use scores::{onehop_score_baseline, onehop_score_binned};
