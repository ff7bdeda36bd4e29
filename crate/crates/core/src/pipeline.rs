//! End-to-end fit: variance grid and prior, effect-size mixture, penalized
//! proportion fit, lfdr, and the rejection set.

use serde::{Deserialize, Serialize};

use crate::baselines::conditional_pvalues_from_posterior;
use crate::effect_prior::{
    build_effect_spec, conditional_density_matrix, fit_effect_prior, EffectPrior, MixtureFamily,
};
use crate::error::Result;
use crate::inference::{lfdr_from_bmat, report_from_lfdr, DecisionReport, ReportDiagnostics};
use crate::optimize::SolverOptions;
use crate::variance_prior::{
    build_variance_grid, fit_variance_prior_from_loglik, posterior_weights_from_loglik,
    s2_likelihood_matrix, SummaryTable, VariancePrior,
};

/// Tuning knobs of the full pipeline, with the recommended defaults:
/// 50 variance grid points, 50 location components with unit variance,
/// automatic scale grid, penalty 10, target level 0.1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GgMixParams {
    /// Number of variance grid points.
    pub grid_points: usize,
    /// Number of location components (ignored by the pure families).
    pub location_points: usize,
    /// Number of scale/uniform components; `None` sizes the grid
    /// automatically from the data span.
    pub scale_points: Option<usize>,
    /// Common variance of the location components.
    pub zeta2: f64,
    /// Weight of the `log(pi_0)` penalty.
    pub lambda: f64,
    pub family: MixtureFamily,
    /// Target false discovery rate.
    pub alpha: f64,
    pub solver: SolverOptions,
}

impl Default for GgMixParams {
    fn default() -> Self {
        GgMixParams {
            grid_points: 50,
            location_points: 50,
            scale_points: None,
            zeta2: 1.0,
            lambda: 10.0,
            family: MixtureFamily::LocPlusScale,
            alpha: 0.1,
            solver: SolverOptions::default(),
        }
    }
}

/// Everything a full run produces.
#[derive(Debug, Clone)]
pub struct GgMixFit {
    pub report: DecisionReport,
    pub vprior: VariancePrior,
    pub eprior: EffectPrior,
    /// Conditional p-values under the fitted variance prior, computed on
    /// the way through for reporting.
    pub conditional_p: Vec<f64>,
}

/// Run the full fit-and-decide pipeline on a summary table.
pub fn run_ggmix(tab: &SummaryTable, params: &GgMixParams) -> Result<GgMixFit> {
    let mut warnings = Vec::new();

    let grid = build_variance_grid(tab.s2(), params.grid_points)?;
    if grid.collapsed() {
        warnings.push("observed s2 are degenerate; variance grid collapsed to one point".into());
    }
    let s2_loglik = s2_likelihood_matrix(tab, &grid)?;
    let vfit = fit_variance_prior_from_loglik(&s2_loglik, &grid, &params.solver)?;
    warnings.extend(vfit.warnings.iter().cloned());
    let post = posterior_weights_from_loglik(&s2_loglik, vfit.prior.delta())?;
    drop(s2_loglik);

    let k1 = if params.family.has_location_part() {
        params.location_points
    } else {
        0
    };
    let spec_build = build_effect_spec(
        tab.x(),
        tab.s2(),
        params.family,
        k1,
        params.scale_points,
        params.zeta2,
    )?;
    warnings.extend(spec_build.warnings.iter().cloned());

    let bmat = conditional_density_matrix(tab, &post, &grid, &spec_build.spec)?;
    let efit = fit_effect_prior(&bmat, params.lambda, &params.solver)?;
    let lfdr = lfdr_from_bmat(&bmat, efit.prior.pi())?;
    drop(bmat);

    let conditional_p = conditional_pvalues_from_posterior(tab, &post, &vfit.prior);

    let diagnostics = ReportDiagnostics {
        variance_fit: Some(vfit.solver.clone()),
        effect_fit: Some(efit.solver.clone()),
        warnings,
    };
    let report = report_from_lfdr(lfdr, params.alpha, efit.prior.pi0(), diagnostics)?;
    Ok(GgMixFit {
        report,
        vprior: vfit.prior,
        eprior: efit.prior,
        conditional_p,
    })
}
