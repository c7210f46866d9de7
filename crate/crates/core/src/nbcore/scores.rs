//! Smoothed one-hop log-likelihood-ratio scores.

/// `ln[(d+ + 1)/(d- + 1) * (n- + 2)/(n+ + 2)]`, the unbinned one-hop score.
#[inline]
pub fn onehop_score_baseline(d_plus: u64, d_minus: u64, n_plus: u64, n_minus: u64) -> f64 {
    onehop_score_binned(d_plus, d_minus, n_plus, n_minus, 2)
}

/// `ln[(d+_w + 1)/(d-_w + 1) * (n- + |W|)/(n+ + |W|)]`, the one-hop score
/// within a bin.
#[inline]
pub fn onehop_score_binned(d_plus: u64, d_minus: u64, n_plus: u64, n_minus: u64, bin_count: usize) -> f64 {
    let w = bin_count as f64;
    ((d_plus as f64 + 1.0) / (d_minus as f64 + 1.0) * ((n_minus as f64 + w) / (n_plus as f64 + w))).ln()
}
