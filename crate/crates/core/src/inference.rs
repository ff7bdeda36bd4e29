//! Local false discovery rates, the data-adaptive threshold, and the
//! rejection rule. Works identically for fitted priors and for true priors
//! supplied from outside (oracle mode).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effect_prior::{conditional_density_matrix, ConditionalDensityMatrix, EffectPrior};
use crate::error::{Error, Result};
use crate::optimize::SolverDiagnostics;
use crate::special::log_sum_exp;
use crate::variance_prior::{posterior_variance_weights, SummaryTable, VariancePrior};

/// Per-hypothesis posterior null probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LfdrVector(Vec<f64>);

impl LfdrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
        {
            return Err(Error::invalid(format!(
                "lfdr[{i}] = {} is not a probability",
                values[i]
            )));
        }
        Ok(LfdrVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lfdr from a prebuilt conditional density matrix and mixture weights
/// `(pi_0, ..., pi_K)`:
/// `lfdr_i = pi_0 exp(B[i,0]) / sum_k pi_k exp(B[i,k])`, in log space.
pub fn lfdr_from_bmat(bmat: &ConditionalDensityMatrix, pi: &[f64]) -> Result<LfdrVector> {
    if pi.len() != bmat.cols() {
        return Err(Error::invalid(format!(
            "{} mixture weights for {} density columns",
            pi.len(),
            bmat.cols()
        )));
    }
    let ln_pi: Vec<f64> = pi
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect();
    let b = bmat.log_densities();
    let values = (0..b.rows())
        .into_par_iter()
        .map(|i| {
            let row = b.row(i);
            let terms: Vec<f64> = row.iter().zip(&ln_pi).map(|(&v, &lp)| v + lp).collect();
            let den = log_sum_exp(&terms);
            if !den.is_finite() {
                return Err(Error::Numerical(format!(
                    "hypothesis {i} has zero conditional density under every component"
                )));
            }
            let v = (terms[0] - den).exp();
            Ok(v.clamp(0.0, 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    LfdrVector::new(values)
}

/// Lfdr from variance and effect priors (fitted or true).
pub fn lfdr_from_priors(
    tab: &SummaryTable,
    vprior: &VariancePrior,
    eprior: &EffectPrior,
) -> Result<LfdrVector> {
    let post = posterior_variance_weights(tab, vprior)?;
    let bmat = conditional_density_matrix(tab, &post, vprior.grid(), eprior.spec())?;
    lfdr_from_bmat(&bmat, eprior.pi())
}

/// Largest-prefix threshold: scan the sorted lfdr values for the longest
/// prefix whose running mean stays at or below `alpha`.
///
/// Returns `(tau_star, rejected_count)`. When no prefix qualifies the result
/// is `(0.0, 0)`; ties at the threshold value are all rejected together.
pub fn adaptive_threshold(lfdr: &[f64], alpha: f64) -> Result<(f64, usize)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    if let Some(i) = lfdr.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid(format!(
            "lfdr[{i}] = {} is not a probability",
            lfdr[i]
        )));
    }
    let mut sorted = lfdr.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best_t = 0;
    let mut running = 0.0;
    for (idx, &v) in sorted.iter().enumerate() {
        running += v;
        if running / (idx + 1) as f64 <= alpha {
            best_t = idx + 1;
        }
    }
    if best_t == 0 {
        return Ok((0.0, 0));
    }
    let tau = sorted[best_t - 1];
    let count = lfdr.iter().filter(|&&v| v <= tau).count();
    Ok((tau, count))
}

/// Solver and construction diagnostics carried along with a decision.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportDiagnostics {
    pub variance_fit: Option<SolverDiagnostics>,
    pub effect_fit: Option<SolverDiagnostics>,
    pub warnings: Vec<String>,
}

/// Full outcome of a decision pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionReport {
    pub lfdr: LfdrVector,
    pub tau_star: f64,
    pub delta: Vec<bool>,
    pub alpha: f64,
    pub pi0_hat: f64,
    pub rejected_count: usize,
    pub diagnostics: ReportDiagnostics,
}

impl DecisionReport {
    /// Indices of rejected hypotheses.
    pub fn rejected_indices(&self) -> Vec<usize> {
        self.delta
            .iter()
            .enumerate()
            .filter_map(|(i, &d)| d.then_some(i))
            .collect()
    }
}

pub(crate) fn report_from_lfdr(
    lfdr: LfdrVector,
    alpha: f64,
    pi0_hat: f64,
    diagnostics: ReportDiagnostics,
) -> Result<DecisionReport> {
    let (tau_star, rejected_count) = adaptive_threshold(lfdr.values(), alpha)?;
    let delta: Vec<bool> = if rejected_count == 0 {
        vec![false; lfdr.len()]
    } else {
        lfdr.values().iter().map(|&v| v <= tau_star).collect()
    };
    debug_assert_eq!(delta.iter().filter(|&&d| d).count(), rejected_count);
    Ok(DecisionReport {
        lfdr,
        tau_star,
        delta,
        alpha,
        pi0_hat,
        rejected_count,
        diagnostics,
    })
}

/// Compute lfdr under the supplied priors and reject below the adaptive
/// threshold.
pub fn decide(
    tab: &SummaryTable,
    vprior: &VariancePrior,
    eprior: &EffectPrior,
    alpha: f64,
) -> Result<DecisionReport> {
    let lfdr = lfdr_from_priors(tab, vprior, eprior)?;
    report_from_lfdr(lfdr, alpha, eprior.pi0(), ReportDiagnostics::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effect_prior::{EffectComponent, EffectMixtureSpec, MixtureFamily};
    use crate::variance_prior::VarianceGrid;
    use approx::assert_relative_eq;

    fn simple_priors(pi0: f64) -> (VariancePrior, EffectPrior) {
        let grid = VarianceGrid::new(vec![1.0]).unwrap();
        let vprior = VariancePrior::new(grid, vec![1.0]).unwrap();
        let spec = EffectMixtureSpec::new(
            MixtureFamily::GaussianScale,
            vec![EffectComponent::Normal {
                mean: 0.0,
                variance: 3.0,
            }],
        )
        .unwrap();
        let eprior = EffectPrior::new(spec, vec![pi0, 1.0 - pi0], 0.0).unwrap();
        (vprior, eprior)
    }

    #[test]
    fn single_hypothesis_closed_form() {
        // X = 0, kappa = 1, f = N(0,3), pi0 = 1/2:
        // lfdr = phi(0;0,1) / (phi(0;0,1) + phi(0;0,4)) = 2/3.
        let tab = SummaryTable::new(vec![0.0], vec![1.0], 10.0).unwrap();
        let (vprior, eprior) = simple_priors(0.5);
        let lfdr = lfdr_from_priors(&tab, &vprior, &eprior).unwrap();
        assert_relative_eq!(lfdr.values()[0], 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_pi0_ends() {
        let tab = SummaryTable::new(vec![0.3, -2.0], vec![1.0, 2.0], 10.0).unwrap();
        let (vprior, eprior1) = simple_priors(1.0);
        let lfdr = lfdr_from_priors(&tab, &vprior, &eprior1).unwrap();
        assert!(lfdr.values().iter().all(|&v| v == 1.0));
        let (_, eprior0) = simple_priors(0.0);
        let lfdr = lfdr_from_priors(&tab, &vprior, &eprior0).unwrap();
        assert!(lfdr.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn threshold_worked_examples() {
        // running means 0.02, 0.035, 0.09 all under 0.1: reject everything
        let (tau, n) = adaptive_threshold(&[0.02, 0.05, 0.2], 0.1).unwrap();
        assert_eq!((tau, n), (0.2, 3));
        // nothing qualifies
        let (tau, n) = adaptive_threshold(&[0.5, 0.9, 0.99], 0.1).unwrap();
        assert_eq!((tau, n), (0.0, 0));
        // running means 0, 0, 1/3: exactly two rejections
        let (tau, n) = adaptive_threshold(&[0.0, 0.0, 1.0], 0.1).unwrap();
        assert_eq!((tau, n), (0.0, 2));
    }

    #[test]
    fn threshold_ties_reject_together() {
        let lfdr = [0.05, 0.05, 0.05, 0.9];
        let (tau, n) = adaptive_threshold(&lfdr, 0.1).unwrap();
        assert_eq!(tau, 0.05);
        assert_eq!(n, 3);
    }

    #[test]
    fn threshold_matches_brute_force() {
        use rand::Rng;
        let mut rng = ggmix_testkit::test_rng(1234);
        for case in 0..300 {
            let m = rng.gen_range(1..400);
            let lfdr: Vec<f64> = (0..m)
                .map(|_| {
                    // mix in repeated values to exercise ties
                    if rng.gen_bool(0.3) {
                        (rng.gen_range(0..6) as f64) / 10.0
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect();
            let alpha = rng.gen_range(0.01..0.5);
            let got = adaptive_threshold(&lfdr, alpha).unwrap();
            let want = ggmix_testkit::brute::lfdr_threshold_quadratic(&lfdr, alpha);
            assert_eq!(got, want, "case {case}");
        }
    }

    #[test]
    fn decide_single_hypothesis() {
        let tab = SummaryTable::new(vec![0.0], vec![1.0], 10.0).unwrap();
        let (vprior, eprior) = simple_priors(0.5);
        // lfdr = 2/3 > alpha: no rejection
        let report = decide(&tab, &vprior, &eprior, 0.1).unwrap();
        assert_eq!(report.rejected_count, 0);
        assert_eq!(report.tau_star, 0.0);
        // alpha = 0.7 admits it
        let report = decide(&tab, &vprior, &eprior, 0.7).unwrap();
        assert_eq!(report.rejected_count, 1);
        assert!(report.delta[0]);
    }

    #[test]
    fn rejections_are_monotone_in_lfdr() {
        let tab = SummaryTable::new(
            vec![0.0, 1.0, 2.0, 3.5, -4.0, 0.3],
            vec![1.0, 0.8, 1.2, 0.5, 0.7, 1.0],
            10.0,
        )
        .unwrap();
        let (vprior, eprior) = simple_priors(0.7);
        let report = decide(&tab, &vprior, &eprior, 0.3).unwrap();
        let lfdr = report.lfdr.values();
        for i in 0..lfdr.len() {
            for j in 0..lfdr.len() {
                if report.delta[j] && lfdr[i] <= lfdr[j] {
                    assert!(report.delta[i], "i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn alpha_validation() {
        assert!(adaptive_threshold(&[0.1], 0.0).is_err());
        assert!(adaptive_threshold(&[0.1], 1.0).is_err());
        assert!(adaptive_threshold(&[1.5], 0.1).is_err());
    }
}
