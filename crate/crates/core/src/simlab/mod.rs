//! Monte-Carlo simulation lab: hierarchical data generation, replicated
//! method comparisons over scenario grids, and FDR/TPR summaries.

pub mod rng;

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{bh, conditional_pvalues, t_pvalues};
use crate::effect_prior::{EffectComponent, EffectMixtureSpec, EffectPrior, MixtureFamily};
use crate::error::{Error, Result};
use crate::inference::decide;
use crate::pipeline::{run_ggmix, GgMixParams};
use crate::special::chi2_cdf;
use crate::variance_prior::{
    build_variance_grid, fit_variance_prior, SummaryTable, VarianceGrid, VariancePrior,
};

use rng::{stream_rng, Stream};

/// Variance prior used to generate data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GSpec {
    /// `sigma^2 = 6/V`, `V ~ chi^2_6`; unit mean precision.
    G1a,
    /// `sigma^2 = 1/V`, `V ~ chi^2_6`; mean 1/4.
    G1b,
    /// Point mass at 1.
    G2,
    /// Equal mass at 1 and 10.
    G3,
    Custom { kappa: Vec<f64>, delta: Vec<f64> },
}

/// Non-null effect-size density used to generate data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FSpec {
    /// `N(0, 16)`.
    F1,
    /// `(2/3) N(0,1) + (1/3) N(0,4)`.
    F2,
    /// `pi1' N(-3,1) + (1-pi1') N(3,1)`.
    F3,
    Custom { components: Vec<WeightedComponent> },
}

/// One mixture component with its generating weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedComponent {
    pub weight: f64,
    pub component: EffectComponent,
}

/// One simulation setting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub g: GSpec,
    pub f: FSpec,
    pub pi0: f64,
    #[serde(default = "default_pi1_prime")]
    pub pi1_prime: f64,
    pub nu: f64,
    pub m: usize,
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub seed: u64,
}

fn default_pi1_prime() -> f64 {
    0.5
}

fn default_alpha() -> f64 {
    0.1
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid("scenario id must not be empty"));
        }
        if !(0.0..=1.0).contains(&self.pi0) {
            return Err(Error::domain(format!("pi0 must lie in [0,1], got {}", self.pi0)));
        }
        if !(0.5..=1.0).contains(&self.pi1_prime) {
            return Err(Error::domain(format!(
                "pi1_prime must lie in [0.5,1], got {}",
                self.pi1_prime
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::domain(format!("nu must be > 0, got {}", self.nu)));
        }
        if self.m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if let GSpec::Custom { kappa, delta } = &self.g {
            VarianceGrid::new(kappa.clone())?;
            let _ = VariancePrior::new(VarianceGrid::new(kappa.clone())?, delta.clone())?;
        }
        if let FSpec::Custom { components } = &self.f {
            if components.is_empty() {
                return Err(Error::invalid("custom f needs at least one component"));
            }
            let total: f64 = components.iter().map(|c| c.weight).sum();
            if components.iter().any(|c| c.weight < 0.0) || (total - 1.0).abs() > 1e-10 {
                return Err(Error::invalid("custom f weights must be a probability vector"));
            }
        }
        Ok(())
    }
}

/// Ground truth of one simulated dataset.
#[derive(Debug, Clone)]
pub struct TruthTable {
    pub theta: Vec<bool>,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
}

/// Draw one dataset from the hierarchical model. Deterministic in
/// `(cfg.seed, rep)` regardless of thread scheduling.
pub fn simulate_dataset(cfg: &ScenarioConfig, rep: usize) -> Result<(SummaryTable, TruthTable)> {
    cfg.validate()?;
    let m = cfg.m;
    let rep = rep as u64;

    let mut r_sigma = stream_rng(cfg.seed, rep, Stream::Sigma2);
    let sigma2: Vec<f64> = match &cfg.g {
        GSpec::G1a => {
            let chi = ChiSquared::new(6.0).unwrap();
            (0..m).map(|_| 6.0 / chi.sample(&mut r_sigma)).collect()
        }
        GSpec::G1b => {
            let chi = ChiSquared::new(6.0).unwrap();
            (0..m).map(|_| 1.0 / chi.sample(&mut r_sigma)).collect()
        }
        GSpec::G2 => vec![1.0; m],
        GSpec::G3 => (0..m)
            .map(|_| if r_sigma.gen::<f64>() < 0.5 { 1.0 } else { 10.0 })
            .collect(),
        GSpec::Custom { kappa, delta } => {
            let cum: Vec<f64> = delta
                .iter()
                .scan(0.0, |acc, &d| {
                    *acc += d;
                    Some(*acc)
                })
                .collect();
            (0..m)
                .map(|_| {
                    let u = r_sigma.gen::<f64>();
                    let idx = cum.iter().position(|&c| u < c).unwrap_or(kappa.len() - 1);
                    kappa[idx]
                })
                .collect()
        }
    };

    let mut r_theta = stream_rng(cfg.seed, rep, Stream::Theta);
    let theta: Vec<bool> = (0..m).map(|_| r_theta.gen_bool(1.0 - cfg.pi0)).collect();

    let mut r_mu = stream_rng(cfg.seed, rep, Stream::Mu);
    let raw_mu: Vec<f64> = match &cfg.f {
        FSpec::F1 => (0..m)
            .map(|_| 4.0 * r_mu.sample::<f64, _>(StandardNormal))
            .collect(),
        FSpec::F2 => (0..m)
            .map(|_| {
                let sd = if r_mu.gen::<f64>() < 2.0 / 3.0 { 1.0 } else { 2.0 };
                sd * r_mu.sample::<f64, _>(StandardNormal)
            })
            .collect(),
        FSpec::F3 => (0..m)
            .map(|_| {
                let center = if r_mu.gen::<f64>() < cfg.pi1_prime {
                    -3.0
                } else {
                    3.0
                };
                center + r_mu.sample::<f64, _>(StandardNormal)
            })
            .collect(),
        FSpec::Custom { components } => {
            let cum: Vec<f64> = components
                .iter()
                .scan(0.0, |acc, c| {
                    *acc += c.weight;
                    Some(*acc)
                })
                .collect();
            (0..m)
                .map(|_| {
                    let u = r_mu.gen::<f64>();
                    let idx = cum
                        .iter()
                        .position(|&c| u < c)
                        .unwrap_or(components.len() - 1);
                    match components[idx].component {
                        EffectComponent::Normal { mean, variance } => {
                            mean + variance.sqrt() * r_mu.sample::<f64, _>(StandardNormal)
                        }
                        EffectComponent::Uniform { lower, upper } => {
                            r_mu.gen_range(lower..upper)
                        }
                    }
                })
                .collect()
        }
    };
    let mu: Vec<f64> = theta
        .iter()
        .zip(&raw_mu)
        .map(|(&t, &v)| if t { v } else { 0.0 })
        .collect();

    let mut r_x = stream_rng(cfg.seed, rep, Stream::X);
    let x: Vec<f64> = mu
        .iter()
        .zip(&sigma2)
        .map(|(&mi, &s)| mi + s.sqrt() * r_x.sample::<f64, _>(StandardNormal))
        .collect();

    let mut r_s2 = stream_rng(cfg.seed, rep, Stream::S2);
    let chi_nu = ChiSquared::new(cfg.nu).map_err(|e| Error::domain(e.to_string()))?;
    let s2: Vec<f64> = sigma2
        .iter()
        .map(|&s| s / cfg.nu * chi_nu.sample(&mut r_s2))
        .collect();

    Ok((
        SummaryTable::new(x, s2, cfg.nu)?,
        TruthTable { theta, mu, sigma2 },
    ))
}

/// False discovery proportion and true positive proportion with the
/// `max(. , 1)` guards.
pub fn fdp_tpp(truth: &TruthTable, delta: &[bool]) -> (f64, f64) {
    assert_eq!(truth.theta.len(), delta.len());
    let mut false_rej = 0usize;
    let mut true_rej = 0usize;
    let mut rejections = 0usize;
    let mut non_null = 0usize;
    for (&t, &d) in truth.theta.iter().zip(delta) {
        if t {
            non_null += 1;
        }
        if d {
            rejections += 1;
            if t {
                true_rej += 1;
            } else {
                false_rej += 1;
            }
        }
    }
    let fdp = false_rej as f64 / rejections.max(1) as f64;
    let tpp = true_rej as f64 / non_null.max(1) as f64;
    (fdp, tpp)
}

/// Quantile of `sigma^2 = c / V`, `V ~ chi^2_nu`, by bisection on the CDF.
fn inv_chi2_scaled_quantile(c: f64, nu: f64, p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let cdf = |y: f64| 1.0 - chi2_cdf(c / y, nu);
    let mut lo = 1e-12_f64;
    let mut hi = 1e12_f64;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Discretize a continuous scaled-inverse-chi-squared prior onto a log grid
/// spanning its 0.0001 to 0.9999 quantiles, with cell masses from CDF
/// differences at geometric midpoints and the tails folded into the end
/// cells.
fn discretize_inv_chi2(c: f64, nu: f64, points: usize) -> Result<VariancePrior> {
    let lo = inv_chi2_scaled_quantile(c, nu, 1e-4);
    let hi = inv_chi2_scaled_quantile(c, nu, 1.0 - 1e-4);
    let (la, lb) = (lo.ln(), hi.ln());
    let kappa: Vec<f64> = (0..points)
        .map(|j| (la + (lb - la) * j as f64 / (points - 1) as f64).exp())
        .collect();
    let cdf = |y: f64| 1.0 - chi2_cdf(c / y, nu);
    let mut delta = Vec::with_capacity(points);
    let mut prev_cut = 0.0; // CDF at 0
    for j in 0..points {
        let upper_cut = if j + 1 < points {
            cdf((kappa[j] * kappa[j + 1]).sqrt())
        } else {
            1.0
        };
        delta.push((upper_cut - prev_cut).max(0.0));
        prev_cut = upper_cut;
    }
    let total: f64 = delta.iter().sum();
    delta.iter_mut().for_each(|d| *d /= total);
    VariancePrior::new(VarianceGrid::new(kappa)?, delta)
}

/// Number of grid points used when a continuous true variance prior has to
/// be discretized for oracle-mode inference.
pub const ORACLE_G_POINTS: usize = 512;

/// True priors of a scenario in the representation the inference engine
/// consumes; continuous variance priors are discretized on a fine log grid.
pub fn true_priors(cfg: &ScenarioConfig) -> Result<(VariancePrior, EffectPrior)> {
    let vprior = match &cfg.g {
        GSpec::G1a => discretize_inv_chi2(6.0, 6.0, ORACLE_G_POINTS)?,
        GSpec::G1b => discretize_inv_chi2(1.0, 6.0, ORACLE_G_POINTS)?,
        GSpec::G2 => VariancePrior::new(VarianceGrid::new(vec![1.0])?, vec![1.0])?,
        GSpec::G3 => VariancePrior::new(VarianceGrid::new(vec![1.0, 10.0])?, vec![0.5, 0.5])?,
        GSpec::Custom { kappa, delta } => {
            VariancePrior::new(VarianceGrid::new(kappa.clone())?, delta.clone())?
        }
    };

    let (family, comps, weights): (MixtureFamily, Vec<EffectComponent>, Vec<f64>) = match &cfg.f {
        FSpec::F1 => (
            MixtureFamily::GaussianScale,
            vec![EffectComponent::Normal {
                mean: 0.0,
                variance: 16.0,
            }],
            vec![1.0],
        ),
        FSpec::F2 => (
            MixtureFamily::GaussianScale,
            vec![
                EffectComponent::Normal {
                    mean: 0.0,
                    variance: 1.0,
                },
                EffectComponent::Normal {
                    mean: 0.0,
                    variance: 4.0,
                },
            ],
            vec![2.0 / 3.0, 1.0 / 3.0],
        ),
        FSpec::F3 => (
            MixtureFamily::LocPlusScale,
            vec![
                EffectComponent::Normal {
                    mean: -3.0,
                    variance: 1.0,
                },
                EffectComponent::Normal {
                    mean: 3.0,
                    variance: 1.0,
                },
            ],
            vec![cfg.pi1_prime, 1.0 - cfg.pi1_prime],
        ),
        FSpec::Custom { components } => (
            MixtureFamily::Custom,
            components.iter().map(|c| c.component).collect(),
            components.iter().map(|c| c.weight).collect(),
        ),
    };
    let spec = EffectMixtureSpec::new(family, comps)?;
    let mut pi = Vec::with_capacity(weights.len() + 1);
    pi.push(cfg.pi0);
    for w in weights {
        pi.push((1.0 - cfg.pi0) * w);
    }
    let eprior = EffectPrior::new(spec, pi, 0.0)?;
    Ok((vprior, eprior))
}

/// Methods the lab can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ggmix")]
    GgMix,
    #[serde(rename = "ggmix_oracle")]
    GgMixOracle,
    #[serde(rename = "bh_t")]
    BhT,
    #[serde(rename = "is_bh")]
    IsBh,
    #[serde(rename = "is_storey_oracle")]
    IsStoreyOracle,
}

impl Method {
    pub fn id(&self) -> &'static str {
        match self {
            Method::GgMix => "ggmix",
            Method::GgMixOracle => "ggmix_oracle",
            Method::BhT => "bh_t",
            Method::IsBh => "is_bh",
            Method::IsStoreyOracle => "is_storey_oracle",
        }
    }

    pub fn all() -> &'static [Method] {
        &[
            Method::GgMix,
            Method::GgMixOracle,
            Method::BhT,
            Method::IsBh,
            Method::IsStoreyOracle,
        ]
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::all()
            .iter()
            .find(|m| m.id() == s)
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

/// Decisions plus the method's null-proportion estimate.
struct MethodOutcome {
    delta: Vec<bool>,
    pi0_hat: f64,
}

fn run_method(
    method: Method,
    cfg: &ScenarioConfig,
    tab: &SummaryTable,
    params: &GgMixParams,
) -> Result<MethodOutcome> {
    match method {
        Method::GgMix => {
            let mut p = params.clone();
            p.alpha = cfg.alpha;
            let fit = run_ggmix(tab, &p)?;
            Ok(MethodOutcome {
                delta: fit.report.delta,
                pi0_hat: fit.report.pi0_hat,
            })
        }
        Method::GgMixOracle => {
            let (vprior, eprior) = true_priors(cfg)?;
            let report = decide(tab, &vprior, &eprior, cfg.alpha)?;
            Ok(MethodOutcome {
                delta: report.delta,
                pi0_hat: cfg.pi0,
            })
        }
        Method::BhT => {
            let p = t_pvalues(tab)?;
            let out = bh(&p, cfg.alpha, 1.0)?;
            Ok(MethodOutcome {
                delta: out.rejected,
                pi0_hat: 1.0,
            })
        }
        Method::IsBh | Method::IsStoreyOracle => {
            let grid = build_variance_grid(tab.s2(), params.grid_points)?;
            let vfit = fit_variance_prior(tab, &grid, &params.solver)?;
            let p = conditional_pvalues(tab, &vfit.prior)?;
            let pi0 = match method {
                Method::IsStoreyOracle => cfg.pi0,
                _ => 1.0,
            };
            let out = bh(&p, cfg.alpha, pi0)?;
            Ok(MethodOutcome {
                delta: out.rejected,
                pi0_hat: pi0,
            })
        }
    }
}

/// One completed (scenario, method, replication) run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepRecord {
    pub scenario_id: String,
    pub method: String,
    pub rep: usize,
    pub fdp: f64,
    pub tpp: f64,
    pub pi0_hat: f64,
    pub runtime_ms: f64,
}

/// One failed (scenario, method, replication) run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub scenario_id: String,
    pub method: String,
    pub rep: usize,
    pub message: String,
}

/// Aggregated metrics for one (scenario, method) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario_id: String,
    pub method: String,
    pub replications: usize,
    pub completed: usize,
    pub failed: usize,
    /// More than 1% of replications failed.
    pub flagged: bool,
    pub fdr: f64,
    pub fdr_se: f64,
    pub tpr: f64,
    pub tpr_se: f64,
    pub pi0_hat_mean: f64,
    pub pi0_hat_se: f64,
}

/// Everything a grid run produces.
#[derive(Debug, Clone)]
pub struct GridResults {
    pub records: Vec<RepRecord>,
    pub failures: Vec<FailureRecord>,
    pub summaries: Vec<ScenarioSummary>,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run every method on every replication of every scenario.
///
/// Replications execute in parallel; records are assembled in
/// `(scenario, replication, method)` order so outputs are deterministic.
/// Per-replication failures are recorded, not fatal.
pub fn run_grid(
    scenarios: &[ScenarioConfig],
    methods: &[Method],
    params: &GgMixParams,
) -> Result<GridResults> {
    if scenarios.is_empty() {
        return Err(Error::invalid("scenario list must not be empty"));
    }
    if methods.is_empty() {
        return Err(Error::invalid("method list must not be empty"));
    }
    for cfg in scenarios {
        cfg.validate()?;
    }

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut summaries = Vec::new();

    for cfg in scenarios {
        type RepOut = (Vec<RepRecord>, Vec<FailureRecord>);
        let per_rep: Vec<RepOut> = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let mut recs = Vec::new();
                let mut fails = Vec::new();
                match simulate_dataset(cfg, rep) {
                    Ok((tab, truth)) => {
                        for &method in methods {
                            let started = Instant::now();
                            match run_method(method, cfg, &tab, params) {
                                Ok(out) => {
                                    let (fdp, tpp) = fdp_tpp(&truth, &out.delta);
                                    recs.push(RepRecord {
                                        scenario_id: cfg.id.clone(),
                                        method: method.id().to_string(),
                                        rep,
                                        fdp,
                                        tpp,
                                        pi0_hat: out.pi0_hat,
                                        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
                                    });
                                }
                                Err(e) => fails.push(FailureRecord {
                                    scenario_id: cfg.id.clone(),
                                    method: method.id().to_string(),
                                    rep,
                                    message: e.to_string(),
                                }),
                            }
                        }
                    }
                    Err(e) => {
                        for &method in methods {
                            fails.push(FailureRecord {
                                scenario_id: cfg.id.clone(),
                                method: method.id().to_string(),
                                rep,
                                message: format!("simulation failed: {e}"),
                            });
                        }
                    }
                }
                (recs, fails)
            })
            .collect();

        let scenario_start = records.len();
        for (recs, fails) in per_rep {
            records.extend(recs);
            failures.extend(fails);
        }
        let scenario_records = &records[scenario_start..];

        for &method in methods {
            let id = method.id();
            let rows: Vec<&RepRecord> = scenario_records
                .iter()
                .filter(|r| r.method == id)
                .collect();
            let fdp: Vec<f64> = rows.iter().map(|r| r.fdp).collect();
            let tpp: Vec<f64> = rows.iter().map(|r| r.tpp).collect();
            let pi0: Vec<f64> = rows.iter().map(|r| r.pi0_hat).collect();
            let (fdr, fdr_se) = mean_se(&fdp);
            let (tpr, tpr_se) = mean_se(&tpp);
            let (pi0_hat_mean, pi0_hat_se) = mean_se(&pi0);
            let completed = rows.len();
            let failed = cfg.replications - completed;
            summaries.push(ScenarioSummary {
                scenario_id: cfg.id.clone(),
                method: id.to_string(),
                replications: cfg.replications,
                completed,
                failed,
                flagged: (failed as f64) > 0.01 * cfg.replications as f64,
                fdr,
                fdr_se,
                tpr,
                tpr_se,
                pi0_hat_mean,
                pi0_hat_se,
            });
        }
    }

    Ok(GridResults {
        records,
        failures,
        summaries,
    })
}

/// Long-format per-replication CSV
/// (`scenario_id,method,rep,fdp,tpp,pi0_hat,runtime_ms`).
pub fn write_replications_csv<W: Write>(w: W, records: &[RepRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Aggregated summary CSV, one row per (scenario, method).
pub fn write_summary_csv<W: Write>(w: W, summaries: &[ScenarioSummary]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for s in summaries {
        wtr.serialize(s)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Scenario grids mirroring the three experiment designs, at a configurable
/// replication count.
pub mod presets {
    use super::*;

    fn fnv1a(s: &str) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in s.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    fn scenario(
        g: &GSpec,
        f: &FSpec,
        pi0: f64,
        pi1_prime: f64,
        nu: f64,
        reps: usize,
        base_seed: u64,
    ) -> ScenarioConfig {
        let gname = match g {
            GSpec::G1a => "g1a",
            GSpec::G1b => "g1b",
            GSpec::G2 => "g2",
            GSpec::G3 => "g3",
            GSpec::Custom { .. } => "gcustom",
        };
        let fname = match f {
            FSpec::F1 => "f1",
            FSpec::F2 => "f2",
            FSpec::F3 => "f3",
            FSpec::Custom { .. } => "fcustom",
        };
        let id = format!(
            "{gname}_{fname}_pi0_{:03}_nu{}_p1p_{:03}",
            (pi0 * 100.0).round() as u32,
            nu,
            (pi1_prime * 100.0).round() as u32
        );
        ScenarioConfig {
            seed: base_seed ^ fnv1a(&id),
            id,
            g: g.clone(),
            f: f.clone(),
            pi0,
            pi1_prime,
            nu,
            m: 5000,
            replications: reps,
            alpha: 0.1,
        }
    }

    const GS: [GSpec; 3] = [GSpec::G1a, GSpec::G2, GSpec::G3];
    const FS: [FSpec; 3] = [FSpec::F1, FSpec::F2, FSpec::F3];

    /// 3 variance priors x 3 effect densities x 9 null proportions at
    /// nu = 10.
    pub fn fig_pi0(reps: usize, base_seed: u64) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for g in &GS {
            for f in &FS {
                for k in 1..=9 {
                    out.push(scenario(g, f, k as f64 / 10.0, 0.5, 10.0, reps, base_seed));
                }
            }
        }
        out
    }

    /// 3 x 3 grid over six degrees-of-freedom levels at pi0 = 0.8.
    pub fn fig_nu(reps: usize, base_seed: u64) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for g in &GS {
            for f in &FS {
                for nu in [2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
                    out.push(scenario(g, f, 0.8, 0.5, nu, reps, base_seed));
                }
            }
        }
        out
    }

    /// Bimodal effect density with the location weight swept from 0.5 to 1.
    pub fn fig_f3(reps: usize, base_seed: u64) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for g in &GS {
            for k in 0..=5 {
                let p1 = 0.5 + 0.1 * k as f64;
                out.push(scenario(g, &FSpec::F3, 0.8, p1, 10.0, reps, base_seed));
            }
        }
        out
    }

    /// Look up a preset by name.
    pub fn by_name(name: &str, reps: usize, base_seed: u64) -> Result<Vec<ScenarioConfig>> {
        match name {
            "fig_pi0" => Ok(fig_pi0(reps, base_seed)),
            "fig_nu" => Ok(fig_nu(reps, base_seed)),
            "fig_f3" => Ok(fig_f3(reps, base_seed)),
            other => Err(Error::invalid(format!("unknown preset '{other}'"))),
        }
    }
}
