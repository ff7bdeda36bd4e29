//! Simplex-constrained concave maximization for mixture weights.
//!
//! Both prior fits reduce to the same problem: given a row-major matrix of
//! log-likelihoods `L`, maximize
//!
//! ```text
//!     F(pi) = sum_i log( sum_k pi_k exp(L[i,k]) ) + lambda * log(pi_0)
//! ```
//!
//! over the probability simplex. `F` is concave, so a first-order
//! certificate is available: with `g_k = d F / d pi_k` and the normalizer
//! `m + lambda`, every maximizer satisfies `max_k g_k / (m + lambda) <= 1`.
//!
//! The accelerated mode interleaves EM multiplicative updates (globally
//! convergent, slow near the boundary) with quadratic-programming steps on
//! the current active set (fast local convergence, can move weights exactly
//! to zero and revive violating zero-weight components). Every candidate
//! step is re-evaluated against the true objective and only accepted if it
//! does not decrease it, so the recorded objective sequence is
//! non-decreasing by construction. A plain EM mode is kept as a reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;

/// Solver flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverMode {
    /// EM updates with QP acceleration on the active set.
    Accelerated,
    /// Bare multiplicative updates; reference mode.
    PlainEm,
}

/// Convergence controls shared by both prior fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Outer iteration cap.
    pub max_iter: usize,
    /// Relative objective-change tolerance.
    pub obj_rel_tol: f64,
    /// Normalized KKT gap tolerance.
    pub kkt_tol: f64,
    /// Weights below this are zeroed (and the vector renormalized) after
    /// convergence.
    pub prune_tol: f64,
    pub mode: SolverMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 2000,
            obj_rel_tol: 1e-9,
            kkt_tol: 1e-6,
            prune_tol: 1e-12,
            mode: SolverMode::Accelerated,
        }
    }
}

/// What the solver did and how well it certified the solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub objective: f64,
    pub iterations: usize,
    pub kkt_gap: f64,
    pub converged: bool,
    pub mode: SolverMode,
    /// Accepted objective values, one per outer iteration (non-decreasing).
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

/// Row dot product, unrolled for instruction-level parallelism.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let chunks = n / 4;
    for c in 0..chunks {
        let j = 4 * c;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut s = (s0 + s1) + (s2 + s3);
    for j in 4 * chunks..n {
        s += a[j] * b[j];
    }
    s
}

/// Exponentiated likelihood matrix with per-row max shifts taken out.
struct ShiftedLik {
    w: Vec<f64>, // row-major exp(L - rowmax)
    rows: usize,
    cols: usize,
    shift_sum: f64,
}

impl ShiftedLik {
    fn new(loglik: &Mat) -> Result<Self> {
        let (rows, cols) = (loglik.rows(), loglik.cols());
        let mut w = vec![0.0; rows * cols];
        let mut shift_sum = 0.0;
        for (i, row) in loglik.rows_iter() {
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !m.is_finite() {
                return Err(Error::Numerical(format!(
                    "row {i} of the likelihood matrix has no finite entry"
                )));
            }
            shift_sum += m;
            for (dst, &v) in w[i * cols..(i + 1) * cols].iter_mut().zip(row) {
                *dst = (v - m).exp();
            }
        }
        Ok(ShiftedLik {
            w,
            rows,
            cols,
            shift_sum,
        })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.cols..(i + 1) * self.cols]
    }

    /// Mixture density per row for the given weights (shifted scale).
    fn densities(&self, pi: &[f64], out: &mut [f64]) {
        for i in 0..self.rows {
            out[i] = dot(self.row(i), pi);
        }
    }

    /// Objective for precomputed densities.
    fn objective(&self, dens: &[f64], pi: &[f64], lambda: f64) -> f64 {
        let mut s = 0.0;
        for &d in dens {
            s += d.ln();
        }
        s += self.shift_sum;
        if lambda > 0.0 {
            s += lambda * pi[0].ln();
        }
        s
    }

    /// Unnormalized likelihood-part gradient: g_k = sum_i W[i,k] / dens_i.
    fn gradient(&self, dens: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..self.rows {
            let inv = 1.0 / dens[i];
            let row = self.row(i);
            for (g, &v) in out.iter_mut().zip(row) {
                *g += v * inv;
            }
        }
    }
}

/// In-place Cholesky solve helpers for the tiny QP KKT systems.
struct Cholesky {
    l: Vec<f64>,
    n: usize,
}

impl Cholesky {
    /// Factor a symmetric positive-definite matrix (row-major, full storage).
    fn factor(a: &[f64], n: usize) -> Option<Cholesky> {
        let mut l = a.to_vec();
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut v = l[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / d;
            }
        }
        Some(Cholesky { l, n })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.l[i * n + k] * x[k];
            }
            x[i] = v / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= self.l[k * n + i] * x[k];
            }
            x[i] = v / self.l[i * n + i];
        }
        x
    }
}

/// Minimize 0.5 x'Qx + c'x over the probability simplex by a primal
/// active-set method. `q` is row-major `n x n`, symmetric PSD (a small ridge
/// is expected to be folded in already). `start` must be feasible.
fn simplex_qp(q: &[f64], c: &[f64], start: &[f64]) -> Vec<f64> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut free: Vec<bool> = x.iter().map(|&v| v > 0.0).collect();
    if !free.iter().any(|&f| f) {
        free[0] = true;
    }

    for _ in 0..(4 * n + 8) {
        let idx: Vec<usize> = (0..n).filter(|&k| free[k]).collect();
        let nf = idx.len();
        // Equality-constrained solve on the free set via the Schur trick:
        // Q u = -c, Q v = 1, then pick the multiplier to meet sum(x) = 1.
        let mut qff = vec![0.0; nf * nf];
        for (a, &ka) in idx.iter().enumerate() {
            for (b, &kb) in idx.iter().enumerate() {
                qff[a * nf + b] = q[ka * n + kb];
            }
        }
        let chol = match Cholesky::factor(&qff, nf) {
            Some(c) => c,
            None => return x, // fall back to the current feasible point
        };
        let neg_c: Vec<f64> = idx.iter().map(|&k| -c[k]).collect();
        let ones = vec![1.0; nf];
        let u = chol.solve(&neg_c);
        let v = chol.solve(&ones);
        let vsum: f64 = v.iter().sum();
        if vsum.abs() < 1e-300 {
            return x;
        }
        let usum: f64 = u.iter().sum();
        let nu = (1.0 - usum) / vsum;
        let target: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + nu * b).collect();

        // Step from x toward the equality-constrained optimum, stopping at
        // the first bound.
        let mut alpha = 1.0;
        let mut blocking = None;
        for (a, &k) in idx.iter().enumerate() {
            if target[a] < 0.0 {
                let step = x[k] / (x[k] - target[a]);
                if step < alpha {
                    alpha = step;
                    blocking = Some(k);
                }
            }
        }
        for (a, &k) in idx.iter().enumerate() {
            x[k] += alpha * (target[a] - x[k]);
            if x[k] < 0.0 {
                x[k] = 0.0;
            }
        }
        if let Some(k) = blocking {
            x[k] = 0.0;
            free[k] = false;
            continue;
        }

        // At the equality optimum on the free set; check bound multipliers.
        let mut grad = vec![0.0; n];
        for k in 0..n {
            let mut s = c[k];
            for j in 0..n {
                s += q[k * n + j] * x[j];
            }
            grad[k] = s;
        }
        let nu_est = idx
            .iter()
            .map(|&k| grad[k])
            .fold(0.0, |acc, g| acc + g)
            / nf as f64;
        let mut worst = None;
        let mut worst_v = -1e-10;
        for k in 0..n {
            if !free[k] {
                let mult = grad[k] - nu_est;
                if mult < worst_v {
                    worst_v = mult;
                    worst = Some(k);
                }
            }
        }
        match worst {
            Some(k) => free[k] = true,
            None => break,
        }
    }
    x
}

fn normalize(pi: &mut [f64]) {
    let s: f64 = pi.iter().sum();
    if s > 0.0 {
        pi.iter_mut().for_each(|p| *p /= s);
    }
}

/// Maximize the penalized mixture log-likelihood over the simplex.
///
/// `loglik` is the `m x K` matrix of per-observation, per-component
/// log-likelihoods; `lambda >= 0` weighs a `log(pi_0)` penalty on column 0.
/// Returns the fitted weights and diagnostics, or [`Error::NonConvergence`]
/// carrying the best iterate.
pub fn maximize_simplex_weights(
    loglik: &Mat,
    lambda: f64,
    init: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolverDiagnostics)> {
    let (m, k) = (loglik.rows(), loglik.cols());
    if m == 0 || k == 0 {
        return Err(Error::invalid("empty likelihood matrix"));
    }
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }

    let lik = ShiftedLik::new(loglik)?;
    let mass = m as f64 + lambda;

    let mut pi: Vec<f64> = match init {
        Some(p0) => {
            if p0.len() != k {
                return Err(Error::invalid(format!(
                    "init length {} does not match {} components",
                    p0.len(),
                    k
                )));
            }
            if p0.iter().any(|&v| v < 0.0) || p0.iter().sum::<f64>() <= 0.0 {
                return Err(Error::invalid("init must be non-negative with positive mass"));
            }
            let mut p = p0.to_vec();
            normalize(&mut p);
            p
        }
        None => vec![1.0 / k as f64; k],
    };
    if lambda > 0.0 && pi[0] == 0.0 {
        return Err(Error::invalid(
            "penalized fit cannot start with zero weight on the null column",
        ));
    }

    // Degenerate simplex: nothing to optimize.
    if k == 1 {
        pi[0] = 1.0;
        let mut dens = vec![0.0; m];
        lik.densities(&pi, &mut dens);
        let objective = lik.objective(&dens, &pi, lambda);
        return Ok((
            pi,
            SolverDiagnostics {
                objective,
                iterations: 0,
                kkt_gap: 0.0,
                converged: true,
                mode: opts.mode,
                objective_trace: vec![objective],
            },
        ));
    }

    let mut dens = vec![0.0; m];
    let mut grad = vec![0.0; k];
    lik.densities(&pi, &mut dens);
    let mut obj = lik.objective(&dens, &pi, lambda);
    if !obj.is_finite() {
        return Err(Error::Numerical("non-finite starting objective".into()));
    }
    let mut trace = vec![obj];
    let mut kkt_gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0usize;

    for it in 1..=opts.max_iter {
        iterations = it;
        lik.gradient(&dens, &mut grad);
        let mut ghat_max = f64::NEG_INFINITY;
        for (idx, &g) in grad.iter().enumerate() {
            let full = if idx == 0 && lambda > 0.0 {
                g + lambda / pi[0]
            } else {
                g
            };
            ghat_max = ghat_max.max(full / mass);
        }
        kkt_gap = (ghat_max - 1.0).max(0.0);

        let prev_obj = *trace.last().unwrap();
        let rel_change = if trace.len() >= 2 {
            let before = trace[trace.len() - 2];
            (prev_obj - before).abs() / prev_obj.abs().max(1.0)
        } else {
            f64::INFINITY
        };
        if rel_change < opts.obj_rel_tol && kkt_gap <= opts.kkt_tol {
            converged = true;
            iterations = it - 1;
            break;
        }

        let accepted = if opts.mode == SolverMode::PlainEm || it % 2 == 1 {
            em_step(&lik, lambda, mass, &mut pi, &mut dens, &mut obj, &grad)
        } else {
            qp_step(&lik, lambda, mass, opts, &mut pi, &mut dens, &mut obj, &grad)
                || em_step(&lik, lambda, mass, &mut pi, &mut dens, &mut obj, &grad)
        };
        stalled = if accepted { 0 } else { stalled + 1 };
        trace.push(obj);
        if stalled >= 50 {
            break; // numerically stationary without a certificate
        }
    }

    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            objective: obj,
            kkt_gap,
            best: pi,
        });
    }

    // Sparsify: tiny trailing weights are numerical dust.
    let mut pruned = false;
    for p in pi.iter_mut() {
        if *p > 0.0 && *p < opts.prune_tol {
            *p = 0.0;
            pruned = true;
        }
    }
    if pruned {
        normalize(&mut pi);
        lik.densities(&pi, &mut dens);
        obj = lik.objective(&dens, &pi, lambda);
        lik.gradient(&dens, &mut grad);
        let mut ghat_max = f64::NEG_INFINITY;
        for (idx, &g) in grad.iter().enumerate() {
            let full = if idx == 0 && lambda > 0.0 {
                g + lambda / pi[0].max(f64::MIN_POSITIVE)
            } else {
                g
            };
            ghat_max = ghat_max.max(full / mass);
        }
        kkt_gap = (ghat_max - 1.0).max(0.0);
    }

    Ok((
        pi,
        SolverDiagnostics {
            objective: obj,
            iterations,
            kkt_gap,
            converged,
            mode: opts.mode,
            objective_trace: trace,
        },
    ))
}

/// One multiplicative update; accepts only if the fresh objective does not
/// decrease. Returns whether the iterate moved.
#[allow(clippy::too_many_arguments)]
fn em_step(
    lik: &ShiftedLik,
    lambda: f64,
    mass: f64,
    pi: &mut Vec<f64>,
    dens: &mut [f64],
    obj: &mut f64,
    grad: &[f64],
) -> bool {
    let mut cand: Vec<f64> = pi
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let extra = if k == 0 { lambda } else { 0.0 };
            (p * grad[k] + extra) / mass
        })
        .collect();
    normalize(&mut cand);
    let mut cand_dens = vec![0.0; dens.len()];
    lik.densities(&cand, &mut cand_dens);
    let cand_obj = lik.objective(&cand_dens, &cand, lambda);
    if cand_obj >= *obj {
        *pi = cand;
        dens.copy_from_slice(&cand_dens);
        let moved = cand_obj > *obj;
        *obj = cand_obj;
        moved
    } else {
        false
    }
}

/// Active-set QP acceleration step with a backtracking line search on the
/// true objective.
#[allow(clippy::too_many_arguments)]
fn qp_step(
    lik: &ShiftedLik,
    lambda: f64,
    mass: f64,
    opts: &SolverOptions,
    pi: &mut Vec<f64>,
    dens: &mut [f64],
    obj: &mut f64,
    grad: &[f64],
) -> bool {
    let k = pi.len();
    let m = dens.len();

    // Normalized gradient including the penalty term.
    let ghat: Vec<f64> = grad
        .iter()
        .enumerate()
        .map(|(idx, &g)| {
            let full = if idx == 0 && lambda > 0.0 {
                g + lambda / pi[idx]
            } else {
                g
            };
            full / mass
        })
        .collect();

    // Active set: current support plus the strongest zero-weight violators,
    // capped to keep the Hessian build cheap on wide problems.
    const MAX_SUPPORT: usize = 40;
    const MAX_ENTRANTS: usize = 12;
    let mut support: Vec<usize> = (0..k).filter(|&j| pi[j] > 0.0).collect();
    if support.len() > MAX_SUPPORT {
        support.sort_by(|&a, &b| pi[b].partial_cmp(&pi[a]).unwrap());
        support.truncate(MAX_SUPPORT);
        support.sort_unstable();
    }
    let mut active = support;
    let mut entrants: Vec<usize> = (0..k)
        .filter(|&j| pi[j] == 0.0 && ghat[j] > 1.0 + 0.1 * opts.kkt_tol)
        .collect();
    entrants.sort_by(|&a, &b| ghat[b].partial_cmp(&ghat[a]).unwrap());
    entrants.truncate(MAX_ENTRANTS);
    active.extend_from_slice(&entrants);
    active.sort_unstable();
    active.dedup();
    let n = active.len();
    if n < 2 {
        return false;
    }

    // Normalized negative Hessian on the active set:
    //   Q = (1/mass) sum_i u_i u_i' + (lambda/mass) / pi_0^2 e0 e0'
    // with u_i = W[i,active] / dens_i.
    let mut q = vec![0.0; n * n];
    let mut u = vec![0.0; n];
    for i in 0..m {
        let row = lik.row(i);
        let inv = 1.0 / dens[i];
        for (a, &ka) in active.iter().enumerate() {
            u[a] = row[ka] * inv;
        }
        for a in 0..n {
            let ua = u[a];
            if ua == 0.0 {
                continue;
            }
            let qrow = &mut q[a * n..(a + 1) * n];
            for b in a..n {
                qrow[b] += ua * u[b];
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            q[b * n + a] = q[a * n + b];
        }
    }
    if lambda > 0.0 && active[0] == 0 {
        q[0] += lambda / (pi[0] * pi[0]);
    }
    let scale = 1.0 / mass;
    q.iter_mut().for_each(|v| *v *= scale);
    // Ridge keeps the factorization alive under duplicated columns.
    let ridge = 1e-10 * (1.0 + q.iter().step_by(n + 1).cloned().fold(0.0, f64::max));
    for a in 0..n {
        q[a * n + a] += ridge;
    }

    // Linear term of the quadratic model in absolute coordinates. Because
    // the mixture objective is 1-homogeneous in the weights, H pi = -g on
    // the support, so the model's linear coefficient collapses to -2 ghat.
    let c: Vec<f64> = active.iter().map(|&ka| -2.0 * ghat[ka]).collect();
    let start: Vec<f64> = active.iter().map(|&ka| pi[ka]).collect();
    let target = simplex_qp(&q, &c, &start);

    // Direction in full coordinates and density increment.
    let mut dir = vec![0.0; k];
    let mut moved = false;
    for (a, &ka) in active.iter().enumerate() {
        dir[ka] = target[a] - pi[ka];
        if dir[ka] != 0.0 {
            moved = true;
        }
    }
    if !moved {
        return false;
    }
    let mut ddens = vec![0.0; m];
    for i in 0..m {
        let row = lik.row(i);
        let mut s = 0.0;
        for (a, &ka) in active.iter().enumerate() {
            s += row[ka] * (target[a] - start[a]);
        }
        ddens[i] = s;
    }

    let mut step = 1.0;
    for _ in 0..12 {
        let cand: Vec<f64> = pi
            .iter()
            .zip(&dir)
            .map(|(&p, &d)| (p + step * d).max(0.0))
            .collect();
        let mut ok = true;
        let mut cand_obj = 0.0;
        for i in 0..m {
            let d = dens[i] + step * ddens[i];
            if d <= 0.0 {
                ok = false;
                break;
            }
            cand_obj += d.ln();
        }
        if ok {
            cand_obj += lik.shift_sum;
            if lambda > 0.0 {
                if cand[0] <= 0.0 {
                    ok = false;
                } else {
                    cand_obj += lambda * cand[0].ln();
                }
            }
        }
        if ok && cand_obj >= *obj {
            // Re-evaluate from scratch so accepted objectives are exact.
            let mut cand = cand;
            normalize(&mut cand);
            let mut cand_dens = vec![0.0; m];
            lik.densities(&cand, &mut cand_dens);
            let fresh = lik.objective(&cand_dens, &cand, lambda);
            if fresh >= *obj {
                *pi = cand;
                dens.copy_from_slice(&cand_dens);
                let improved = fresh > *obj;
                *obj = fresh;
                return improved;
            }
        }
        step *= 0.5;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_cluster_matrix(m: usize) -> Mat {
        let mut data = Vec::with_capacity(m * 2);
        for i in 0..m {
            if i % 4 == 0 {
                data.extend_from_slice(&[0.0, -30.0]);
            } else {
                data.extend_from_slice(&[-30.0, 0.0]);
            }
        }
        Mat::from_vec(m, 2, data)
    }

    #[test]
    fn separable_two_columns_reaches_proportions() {
        let mat = two_cluster_matrix(400);
        let (pi, diag) =
            maximize_simplex_weights(&mat, 0.0, None, &SolverOptions::default()).unwrap();
        assert!(diag.converged);
        assert!(diag.kkt_gap <= 1e-6);
        assert_relative_eq!(pi[0], 0.25, epsilon = 1e-6);
        for w in diag.objective_trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn single_column_short_circuits() {
        let mat = Mat::from_vec(3, 1, vec![-1.0, -2.0, -0.5]);
        let (pi, diag) =
            maximize_simplex_weights(&mat, 0.0, None, &SolverOptions::default()).unwrap();
        assert_eq!(pi, vec![1.0]);
        assert_eq!(diag.iterations, 0);
        assert!(diag.converged);
        assert_relative_eq!(diag.objective, -3.5, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_columns_match_deduplicated_objective() {
        // Mass can split arbitrarily between identical columns without
        // changing the mixture; the attained objective must match the fit
        // with the duplicate removed.
        let m = 300;
        let mut three = Vec::new();
        let mut two = Vec::new();
        for i in 0..m {
            let a = -0.5 * ((i % 7) as f64);
            let b = -0.1 * ((i % 3) as f64);
            three.extend_from_slice(&[a, a, b]);
            two.extend_from_slice(&[a, b]);
        }
        let opts = SolverOptions::default();
        let (_, d3) =
            maximize_simplex_weights(&Mat::from_vec(m, 3, three), 0.0, None, &opts).unwrap();
        let (_, d2) =
            maximize_simplex_weights(&Mat::from_vec(m, 2, two), 0.0, None, &opts).unwrap();
        assert!((d3.objective - d2.objective).abs() <= 1e-7 * d2.objective.abs());
        assert!(d3.kkt_gap <= 1e-6 && d2.kkt_gap <= 1e-6);
    }

    #[test]
    fn permutation_of_columns_is_immaterial() {
        let m = 200;
        let mut base = Vec::new();
        for i in 0..m {
            let x = (i as f64) / 40.0 - 2.5;
            base.push([-x * x, -(x - 1.0) * (x - 1.0), -(x + 2.0) * (x + 2.0) * 0.5]);
        }
        let fwd: Vec<f64> = base.iter().flat_map(|r| r.to_vec()).collect();
        let perm: Vec<f64> = base.iter().flat_map(|r| vec![r[2], r[0], r[1]]).collect();
        let opts = SolverOptions::default();
        let (pi_f, d_f) =
            maximize_simplex_weights(&Mat::from_vec(m, 3, fwd), 0.0, None, &opts).unwrap();
        let (pi_p, d_p) =
            maximize_simplex_weights(&Mat::from_vec(m, 3, perm), 0.0, None, &opts).unwrap();
        assert!((d_f.objective - d_p.objective).abs() <= 1e-8 * d_f.objective.abs());
        assert!(d_p.kkt_gap <= 1e-6);
        assert_relative_eq!(pi_f[0], pi_p[1], epsilon = 1e-5);
        assert_relative_eq!(pi_f[1], pi_p[2], epsilon = 1e-5);
        assert_relative_eq!(pi_f[2], pi_p[0], epsilon = 1e-5);
    }

    #[test]
    fn identical_columns_with_penalty_put_everything_on_null() {
        // The likelihood term is constant, so the penalty decides.
        let m = 500;
        let data: Vec<f64> = (0..m * 3).map(|i| -((i / 3) as f64 % 5.0)).collect();
        let mat = Mat::from_vec(m, 3, data);
        let (pi, diag) =
            maximize_simplex_weights(&mat, 10.0, None, &SolverOptions::default()).unwrap();
        assert!(diag.converged);
        assert!(pi[0] > 1.0 - 1e-9, "pi0 = {}", pi[0]);
    }

    #[test]
    fn nonconvergence_surfaces_best_iterate() {
        let mat = two_cluster_matrix(400);
        let opts = SolverOptions {
            max_iter: 1,
            ..SolverOptions::default()
        };
        match maximize_simplex_weights(&mat, 0.0, None, &opts) {
            Err(Error::NonConvergence { best, .. }) => {
                assert_eq!(best.len(), 2);
            }
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn matches_long_run_reference_em() {
        // Correlated columns make EM slow; the accelerated fit must land on
        // the same objective the long-run reference reaches.
        let m = 400;
        let k = 12;
        let mut data = Vec::with_capacity(m * k);
        for i in 0..m {
            let x = -3.0 + 6.0 * (i as f64) / (m as f64);
            for j in 0..k {
                let mu = -2.0 + 4.0 * (j as f64) / ((k - 1) as f64);
                data.push(-0.5 * (x - mu) * (x - mu));
            }
        }
        let mat = Mat::from_vec(m, k, data.clone());
        let (_, diag) =
            maximize_simplex_weights(&mat, 0.0, None, &SolverOptions::default()).unwrap();
        let oracle = ggmix_testkit::em::em_solve(&data, m, k, 0.0, 200_000, 1e-10);
        assert!(
            diag.objective >= oracle.objective - 1e-7,
            "sqp {} vs em {}",
            diag.objective,
            oracle.objective
        );
        assert!((diag.objective - oracle.objective).abs() <= 1e-6);
    }

    #[test]
    fn penalized_fit_matches_reference_em() {
        let m = 300;
        let k = 6;
        let mut data = Vec::with_capacity(m * k);
        for i in 0..m {
            let x = -2.0 + 4.0 * (i as f64) / (m as f64);
            for j in 0..k {
                let s = 1.0 + j as f64;
                data.push(-0.5 * x * x / s - 0.5 * s.ln());
            }
        }
        let mat = Mat::from_vec(m, k, data.clone());
        let (pi, diag) =
            maximize_simplex_weights(&mat, 10.0, None, &SolverOptions::default()).unwrap();
        let oracle = ggmix_testkit::em::em_solve(&data, m, k, 10.0, 200_000, 1e-10);
        assert!((diag.objective - oracle.objective).abs() <= 1e-6);
        assert_relative_eq!(pi[0], oracle.weights[0], epsilon = 1e-4);
    }
}
