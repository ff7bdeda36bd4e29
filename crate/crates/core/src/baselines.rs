//! Reference procedures: BH on t-statistic p-values, conditional p-values
//! under the fitted variance prior, and BH with a known null-proportion
//! adjustment (Storey-style when the true proportion is supplied).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{normal_sf, t_two_sided_pvalue};
use crate::variance_prior::{posterior_variance_weights, PosteriorGrid, SummaryTable, VariancePrior};

/// Two-sided p-values from `t_i = X_i / S_i` against the t distribution
/// with the table's degrees of freedom.
pub fn t_pvalues(tab: &SummaryTable) -> Result<Vec<f64>> {
    let nu = tab.nu();
    tab.x()
        .par_iter()
        .zip(tab.s2().par_iter())
        .map(|(&x, &s2)| t_two_sided_pvalue(x / s2.sqrt(), nu))
        .collect()
}

/// Two-sided conditional p-values under the estimated variance prior:
/// `p_i = 2 * sum_l pi_{i,l} * (1 - Phi(|X_i| / sqrt(kappa_l)))`.
pub fn conditional_pvalues(tab: &SummaryTable, vprior: &VariancePrior) -> Result<Vec<f64>> {
    let post = posterior_variance_weights(tab, vprior)?;
    Ok(conditional_pvalues_from_posterior(tab, &post, vprior))
}

/// Same computation reusing an existing posterior grid.
pub fn conditional_pvalues_from_posterior(
    tab: &SummaryTable,
    post: &PosteriorGrid,
    vprior: &VariancePrior,
) -> Vec<f64> {
    let inv_sqrt_kappa: Vec<f64> = vprior.grid().points().iter().map(|&k| 1.0 / k.sqrt()).collect();
    (0..tab.len())
        .into_par_iter()
        .map(|i| {
            let ax = tab.x()[i].abs();
            let mut tail = 0.0;
            for (&w, &s) in post.row(i).iter().zip(&inv_sqrt_kappa) {
                if w > 0.0 {
                    tail += w * normal_sf(ax * s);
                }
            }
            (2.0 * tail).clamp(0.0, 1.0)
        })
        .collect()
}

/// Outcome of a step-up BH pass.
#[derive(Debug, Clone)]
pub struct BhOutcome {
    pub rejected: Vec<bool>,
    pub rejected_count: usize,
    /// p-value cutoff actually applied (0 when nothing is rejected).
    pub cutoff: f64,
}

/// Step-up BH at level `alpha` with a null-proportion adjustment: rejects
/// the k largest-index prefix with `p_(k) <= k * alpha / (m * pi0)`.
/// `pi0 = 1` is plain BH; supplying the true proportion gives the oracle
/// Storey variant.
pub fn bh(p: &[f64], alpha: f64, pi0: f64) -> Result<BhOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    if !(pi0 > 0.0 && pi0 <= 1.0) {
        return Err(Error::domain(format!("pi0 must be in (0,1], got {pi0}")));
    }
    if let Some(i) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid(format!("p[{i}] = {} is not a probability", p[i])));
    }
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
        return Ok(BhOutcome {
            rejected: vec![false; m],
            rejected_count: 0,
            cutoff: 0.0,
        });
    }
    let cutoff = sorted[k_hat - 1];
    let rejected: Vec<bool> = p.iter().map(|&v| v <= cutoff).collect();
    let rejected_count = rejected.iter().filter(|&&r| r).count();
    Ok(BhOutcome {
        rejected,
        rejected_count,
        cutoff,
    })
}
