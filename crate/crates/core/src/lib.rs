//! Empirical-Bayes multiple testing for the heteroscedastic normal-means
//! problem, working from summary statistics `(X_i, S_i^2)` with shared
//! degrees of freedom.
//!
//! The pipeline discretizes the variance prior on a log grid and fits its
//! weights by maximum marginal likelihood of `S^2`, builds a flexible
//! mixture for the effect-size prior, fits the mixture proportions by a
//! penalized conditional likelihood, and rejects hypotheses whose local
//! false discovery rate falls under a data-adaptive threshold. Baseline
//! procedures (t-statistic BH, conditional-p BH, oracle Storey-BH) and a
//! Monte-Carlo simulation lab live alongside.

pub mod baselines;
pub mod effect_prior;
pub mod error;
pub mod inference;
pub mod mat;
pub mod optimize;
pub mod pipeline;
pub mod simlab;
pub mod special;
pub mod variance_prior;

pub use crate::error::{Error, Result};
pub use crate::mat::Mat;
pub use crate::optimize::{SolverDiagnostics, SolverMode, SolverOptions};
pub use crate::pipeline::{GgMixFit, GgMixParams};
pub use crate::variance_prior::{PosteriorGrid, SummaryTable, VarianceGrid, VariancePrior};

pub use crate::effect_prior::{
    ConditionalDensityMatrix, EffectComponent, EffectMixtureSpec, EffectPrior, MixtureFamily,
};
pub use crate::inference::{DecisionReport, LfdrVector};
