//! Test-only oracles shared by the workspace test suites.
//!
//! Everything in here exists to check the production crates from an
//! independent direction: adaptive quadrature instead of closed forms, a
//! long-run plain EM loop instead of the accelerated solver, naive
//! enumeration instead of the streaming threshold rules. None of this code
//! is reachable from the shipped library or CLI.

pub mod brute;
pub mod em;
pub mod quad;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for building test instances.
pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator).
pub fn sd(xs: &[f64]) -> f64 {
    assert!(xs.len() >= 2);
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Monte-Carlo standard error of the mean.
pub fn se(xs: &[f64]) -> f64 {
    sd(xs) / (xs.len() as f64).sqrt()
}
