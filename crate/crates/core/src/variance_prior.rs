//! Discrete variance prior: grid construction, maximum marginal likelihood
//! fit of its weights from `S^2`, and per-hypothesis posterior weights over
//! the grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::optimize::{maximize_simplex_weights, SolverDiagnostics, SolverOptions};
use crate::special::{gamma_logpdf_raw, ln_gamma};

/// Observed summary statistics: one `(X_i, S_i^2)` pair per hypothesis and
/// the shared degrees of freedom of the variance estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryTable {
    x: Vec<f64>,
    s2: Vec<f64>,
    nu: f64,
}

impl SummaryTable {
    pub fn new(x: Vec<f64>, s2: Vec<f64>, nu: f64) -> Result<Self> {
        if x.is_empty() || x.len() != s2.len() {
            return Err(Error::invalid(format!(
                "need equal-length non-empty columns, got x: {}, s2: {}",
                x.len(),
                s2.len()
            )));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::domain(format!("degrees of freedom must be > 0, got {nu}")));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("x[{i}] is not finite")));
        }
        if let Some(i) = s2.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!(
                "s2[{i}] must be positive and finite, got {}",
                s2[i]
            )));
        }
        Ok(SummaryTable { x, s2, nu })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn s2(&self) -> &[f64] {
        &self.s2
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Strictly increasing positive support points for the variance prior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceGrid {
    kappa: Vec<f64>,
    /// Set when the requested grid collapsed to a single point because the
    /// observed `S^2` were degenerate.
    collapsed: bool,
}

impl VarianceGrid {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.is_empty() {
            return Err(Error::invalid("variance grid needs at least one point"));
        }
        if !(kappa[0] > 0.0) {
            return Err(Error::domain("variance grid points must be positive"));
        }
        if kappa.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("variance grid must be strictly increasing"));
        }
        Ok(VarianceGrid {
            kappa,
            collapsed: false,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.kappa
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn collapsed(&self) -> bool {
        self.collapsed
    }
}

/// Empirical quantile as the order statistic at `ceil(q * m)` (1-based).
pub(crate) fn order_statistic_quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let idx = (q * m as f64).ceil() as usize;
    sorted[idx.clamp(1, m) - 1]
}

/// Log-spaced grid between the 1% empirical quantile and the maximum of the
/// observed `S^2`. Degenerate inputs collapse to a single point.
pub fn build_variance_grid(s2: &[f64], l: usize) -> Result<VarianceGrid> {
    if s2.is_empty() {
        return Err(Error::invalid("cannot build a grid from no observations"));
    }
    if l == 0 {
        return Err(Error::invalid("grid size must be at least 1"));
    }
    if let Some(i) = s2.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid(format!(
            "s2[{i}] must be positive and finite, got {}",
            s2[i]
        )));
    }
    let mut sorted = s2.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let a = order_statistic_quantile(&sorted, 0.01);
    let b = *sorted.last().unwrap();

    if a == b {
        return Ok(VarianceGrid {
            kappa: vec![a],
            collapsed: true,
        });
    }
    if l == 1 {
        // Degenerate test mode: a single representative point.
        return Ok(VarianceGrid {
            kappa: vec![(a * b).sqrt()],
            collapsed: false,
        });
    }
    let (ln_a, ln_b) = (a.ln(), b.ln());
    let mut kappa: Vec<f64> = (0..l)
        .map(|j| (ln_a + (ln_b - ln_a) * j as f64 / (l - 1) as f64).exp())
        .collect();
    kappa[0] = a;
    kappa[l - 1] = b;
    VarianceGrid::new(kappa)
}

/// `m x L` matrix of log-densities of each `S_i^2` under each grid point:
/// entry `(i, l)` is the gamma log-density with shape `nu/2` and rate
/// `nu / (2 kappa_l)`.
pub fn s2_likelihood_matrix(tab: &SummaryTable, grid: &VarianceGrid) -> Result<Mat> {
    let (m, l) = (tab.len(), grid.len());
    let shape = 0.5 * tab.nu();
    // Per-column constants: shape*ln(rate) - ln_gamma(shape).
    let rates: Vec<f64> = grid.points().iter().map(|&k| tab.nu() / (2.0 * k)).collect();
    let lg = ln_gamma(shape);
    let consts: Vec<f64> = rates.iter().map(|&r| shape * r.ln() - lg).collect();

    let mut mat = Mat::zeros(m, l);
    mat.rows_chunks_mut()
        .collect::<Vec<_>>()
        .into_par_iter()
        .enumerate()
        .for_each(|(i, row)| {
            let s2 = tab.s2()[i];
            let ln_s2 = s2.ln();
            let base = (shape - 1.0) * ln_s2;
            for ((dst, &rate), &c) in row.iter_mut().zip(&rates).zip(&consts) {
                *dst = c + base - rate * s2;
            }
        });
    Ok(mat)
}

/// Discretized variance prior: grid points with simplex weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariancePrior {
    grid: VarianceGrid,
    delta: Vec<f64>,
}

impl VariancePrior {
    pub fn new(grid: VarianceGrid, delta: Vec<f64>) -> Result<Self> {
        if delta.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} grid points",
                delta.len(),
                grid.len()
            )));
        }
        if delta.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(Error::invalid("weights must be non-negative and finite"));
        }
        let total: f64 = delta.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(VariancePrior { grid, delta })
    }

    pub fn grid(&self) -> &VarianceGrid {
        &self.grid
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Log marginal density of one `s2` value under this prior.
    pub fn log_marginal_s2(&self, s2: f64, nu: f64) -> f64 {
        let shape = 0.5 * nu;
        let terms: Vec<f64> = self
            .grid
            .points()
            .iter()
            .zip(&self.delta)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&k, &d)| d.ln() + gamma_logpdf_raw(s2, shape, nu / (2.0 * k)))
            .collect();
        crate::special::log_sum_exp(&terms)
    }
}

/// Result of the marginal-likelihood fit of the variance prior.
#[derive(Debug, Clone)]
pub struct VariancePriorFit {
    pub prior: VariancePrior,
    pub solver: SolverDiagnostics,
    pub warnings: Vec<String>,
}

/// Fit the grid weights by maximizing the marginal log-likelihood of `S^2`
/// over the simplex.
pub fn fit_variance_prior(
    tab: &SummaryTable,
    grid: &VarianceGrid,
    opts: &SolverOptions,
) -> Result<VariancePriorFit> {
    let loglik = s2_likelihood_matrix(tab, grid)?;
    fit_variance_prior_from_loglik(&loglik, grid, opts)
}

/// Same fit from a precomputed log-likelihood matrix (column l corresponds
/// to grid point l), so pipelines can reuse the matrix.
pub fn fit_variance_prior_from_loglik(
    loglik: &Mat,
    grid: &VarianceGrid,
    opts: &SolverOptions,
) -> Result<VariancePriorFit> {
    let mut warnings = Vec::new();
    if loglik.rows() < loglik.cols() {
        warnings.push(format!(
            "fewer observations ({}) than grid points ({}); the fit may be underdetermined",
            loglik.rows(),
            loglik.cols()
        ));
    }
    let (delta, solver) = maximize_simplex_weights(loglik, 0.0, None, opts)?;
    Ok(VariancePriorFit {
        prior: VariancePrior::new(grid.clone(), delta)?,
        solver,
        warnings,
    })
}

/// Row-stochastic `m x L` posterior weights of each hypothesis's variance
/// over the grid points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorGrid {
    weights: Mat,
}

impl PosteriorGrid {
    pub fn weights(&self) -> &Mat {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.weights.row(i)
    }

    pub fn rows(&self) -> usize {
        self.weights.rows()
    }

    pub fn cols(&self) -> usize {
        self.weights.cols()
    }
}

/// Posterior weights `prop. to delta_l * exp(loglik[i,l])`, normalized per
/// row in log space.
pub fn posterior_weights_from_loglik(loglik: &Mat, delta: &[f64]) -> Result<PosteriorGrid> {
    if delta.len() != loglik.cols() {
        return Err(Error::invalid("weight/grid size mismatch"));
    }
    let ln_delta: Vec<f64> = delta
        .iter()
        .map(|&d| if d > 0.0 { d.ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut weights = Mat::zeros(loglik.rows(), loglik.cols());
    let bad: Vec<usize> = weights
        .rows_chunks_mut()
        .collect::<Vec<_>>()
        .into_par_iter()
        .enumerate()
        .filter_map(|(i, out)| {
            let row = loglik.row(i);
            let mut mx = f64::NEG_INFINITY;
            for (o, (&ll, &ld)) in out.iter_mut().zip(row.iter().zip(&ln_delta)) {
                *o = ll + ld;
                if *o > mx {
                    mx = *o;
                }
            }
            if !mx.is_finite() {
                return Some(i);
            }
            let mut total = 0.0;
            for o in out.iter_mut() {
                *o = (*o - mx).exp();
                total += *o;
            }
            let inv = 1.0 / total;
            for o in out.iter_mut() {
                *o *= inv;
            }
            None
        })
        .collect();
    if let Some(&i) = bad.first() {
        return Err(Error::Numerical(format!(
            "hypothesis {i} has zero posterior mass on every grid point"
        )));
    }
    Ok(PosteriorGrid { weights })
}

/// Posterior variance weights for every hypothesis under a fitted prior.
pub fn posterior_variance_weights(
    tab: &SummaryTable,
    prior: &VariancePrior,
) -> Result<PosteriorGrid> {
    let loglik = s2_likelihood_matrix(tab, prior.grid())?;
    posterior_weights_from_loglik(&loglik, prior.delta())
}
