//! Plain EM reference solver for simplex-constrained mixture weights.
//!
//! Maximizes `sum_i log(sum_k pi_k exp(L[i,k])) + lambda*log(pi_0)` over the
//! probability simplex with bare multiplicative updates. Deliberately simple:
//! no acceleration, no active sets. Used as the long-run oracle the fast
//! solver is compared against.

/// Result of a reference EM run.
#[derive(Debug, Clone)]
pub struct EmResult {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Upper bound on `F* - F(weights)` from the simplex gradient inequality.
    pub subopt_bound: f64,
}

/// Run plain EM on a row-major `rows x cols` matrix of log-likelihoods.
///
/// `lambda` is the weight of a `log(pi_0)` penalty on column 0 (0 disables
/// it). Stops after `max_iter` updates or as soon as the suboptimality bound
/// drops below `stop_bound`; by concavity every later iterate's objective is
/// within that bound of the returned one.
pub fn em_solve(
    loglik: &[f64],
    rows: usize,
    cols: usize,
    lambda: f64,
    max_iter: usize,
    stop_bound: f64,
) -> EmResult {
    assert_eq!(loglik.len(), rows * cols);
    assert!(rows > 0 && cols > 0);

    // Shift each row by its max so the exponentials stay in [0, 1].
    let mut w = vec![0.0f64; rows * cols];
    let mut shift_sum = 0.0;
    for i in 0..rows {
        let row = &loglik[i * cols..(i + 1) * cols];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(m.is_finite(), "row {i} has no finite log-likelihood");
        shift_sum += m;
        for (dst, &v) in w[i * cols..(i + 1) * cols].iter_mut().zip(row) {
            *dst = (v - m).exp();
        }
    }

    let mass = rows as f64 + lambda;
    let mut pi = vec![1.0 / cols as f64; cols];
    let mut grad = vec![0.0f64; cols];
    let mut objective = f64::NEG_INFINITY;
    let mut bound = f64::INFINITY;
    let mut iterations = 0;

    for it in 0..=max_iter {
        // One pass: mixture density per row, objective, gradient accumulation.
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut obj = 0.0;
        for i in 0..rows {
            let row = &w[i * cols..(i + 1) * cols];
            let mut den = 0.0;
            for (v, p) in row.iter().zip(&pi) {
                den += v * p;
            }
            obj += den.ln();
            let inv = 1.0 / den;
            for (g, v) in grad.iter_mut().zip(row) {
                *g += v * inv;
            }
        }
        obj += shift_sum;
        if lambda > 0.0 {
            obj += lambda * pi[0].ln();
        }
        objective = obj;
        iterations = it;

        let mut gmax = f64::NEG_INFINITY;
        for (k, g) in grad.iter().enumerate() {
            let gk = if k == 0 && lambda > 0.0 {
                *g + lambda / pi[0]
            } else {
                *g
            };
            gmax = gmax.max(gk);
        }
        bound = (gmax - mass).max(0.0);
        if bound <= stop_bound || it == max_iter {
            break;
        }

        for (k, p) in pi.iter_mut().enumerate() {
            let extra = if k == 0 { lambda } else { 0.0 };
            *p = (*p * grad[k] + extra) / mass;
        }
    }

    EmResult {
        weights: pi,
        objective,
        iterations,
        subopt_bound: bound,
    }
}
