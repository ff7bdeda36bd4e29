//! Naive reference implementations of the step-up threshold rules.

/// Largest-prefix local-fdr threshold by fresh per-prefix summation, O(m^2).
///
/// Returns `(tau_star, rejected_count)` with the `max emptyset = 0`
/// convention and all ties at the threshold rejected.
pub fn lfdr_threshold_quadratic(lfdr: &[f64], alpha: f64) -> (f64, usize) {
    let mut sorted = lfdr.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best_t = 0;
    for t in 1..=sorted.len() {
        let mut sum = 0.0;
        for &v in &sorted[..t] {
            sum += v;
        }
        if sum / t as f64 <= alpha {
            best_t = t;
        }
    }
    if best_t == 0 {
        return (0.0, 0);
    }
    let tau = sorted[best_t - 1];
    let count = lfdr.iter().filter(|&&v| v <= tau).count();
    (tau, count)
}

/// Same rule with an incremental running sum, O(m log m). Structurally
/// independent of the production code path but cheap enough for large m.
pub fn lfdr_threshold_incremental(lfdr: &[f64], alpha: f64) -> (f64, usize) {
    let mut sorted = lfdr.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best_t = 0;
    let mut sum = 0.0;
    for (idx, &v) in sorted.iter().enumerate() {
        sum += v;
        if sum / (idx + 1) as f64 <= alpha {
            best_t = idx + 1;
        }
    }
    if best_t == 0 {
        return (0.0, 0);
    }
    let tau = sorted[best_t - 1];
    let count = lfdr.iter().filter(|&&v| v <= tau).count();
    (tau, count)
}

/// Step-up BH on p-values with a known null-proportion adjustment.
///
/// Rejects every p-value `<= p_(k_hat)` where `k_hat` is the largest k with
/// `p_(k) <= k*alpha/(m*pi0)`.
pub fn bh_reject(p: &[f64], alpha: f64, pi0: f64) -> Vec<bool> {
    let m = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut k_hat = 0;
    for k in 1..=m {
        if sorted[k - 1] <= k as f64 * alpha / (m as f64 * pi0) {
            k_hat = k;
        }
    }
    if k_hat == 0 {
        return vec![false; m];
    }
    let cutoff = sorted[k_hat - 1];
    p.iter().map(|&v| v <= cutoff).collect()
}
