//! Ruin probabilities of the surplus process `U_t = u + Σ_{i ≤ t} x_i`.
//!
//! Ruin at `t` means `U_t < 0`; a surplus of exactly zero survives.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forecast::ConditionalSampler;
use crate::kernels::{Covariance, Kernel};
use crate::math::sqrt;
use crate::par::map_indexed;
use crate::rng::replicate_rng;
use crate::simulate::GaussianSampler;

#[derive(Debug, Clone, PartialEq)]
pub struct RuinEstimate {
    pub u: f64,
    pub horizon: usize,
    /// `ψ̂(u, t)` for `t = 1..=horizon`.
    pub psi_curve: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Entry `t - 1` counts replicates first ruined at step `t`.
    pub first_ruin_histogram: Vec<u64>,
    pub replicates: usize,
}

impl RuinEstimate {
    fn from_first_ruins(u: f64, horizon: usize, first: &[Option<usize>]) -> Self {
        let mut hist = vec![0u64; horizon];
        for t in first.iter().flatten() {
            hist[*t] += 1;
        }
        let reps = first.len();
        let mut acc = 0u64;
        let mut psi_curve = Vec::with_capacity(horizon);
        let mut std_errors = Vec::with_capacity(horizon);
        for h in &hist {
            acc += h;
            let p = acc as f64 / reps as f64;
            psi_curve.push(p);
            std_errors.push(sqrt(p * (1.0 - p) / reps as f64));
        }
        RuinEstimate {
            u,
            horizon,
            psi_curve,
            std_errors,
            first_ruin_histogram: hist,
            replicates: reps,
        }
    }
}

/// Index of the first step whose level is strictly negative.
pub fn first_ruin(levels: &[f64]) -> Option<usize> {
    levels.iter().position(|&v| v < 0.0)
}

/// Monte-Carlo `ψ(u, t)` over `t = 1..=horizon`. Runs sharing `seed` share
/// their increments, so curves for different `u` are coupled.
pub fn ruin_probability<K: Covariance + ?Sized>(
    kernel: &K,
    u: f64,
    horizon: usize,
    replicates: usize,
    seed: u64,
) -> Result<RuinEstimate> {
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::invalid(alloc::format!("initial surplus must be nonnegative, got {u}")));
    }
    if replicates == 0 {
        return Err(Error::invalid("at least one replicate is needed"));
    }
    if horizon == 0 {
        return Ok(RuinEstimate::from_first_ruins(u, 0, &vec![None; replicates]));
    }
    let sampler = GaussianSampler::new(kernel, horizon)?;
    let first = map_indexed(replicates, |i| {
        let x = sampler.draw_replicate(seed, i as u64);
        let mut level = u;
        x.iter().position(|xi| {
            level += xi;
            level < 0.0
        })
    });
    Ok(RuinEstimate::from_first_ruins(u, horizon, &first))
}

/// Ruin probabilities over the next `horizon` steps of an observed surplus
/// history. The first observation is the initial surplus `u`; every
/// observation must be strictly positive.
pub fn conditional_ruin<K: Covariance + ?Sized>(
    kernel: &K,
    observed_surplus: &[f64],
    horizon: usize,
    replicates: usize,
    seed: u64,
) -> Result<RuinEstimate> {
    if let Some(v) = observed_surplus.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::invalid(alloc::format!(
            "observed surplus must stay above zero, found {v}"
        )));
    }
    if replicates == 0 {
        return Err(Error::invalid("at least one replicate is needed"));
    }
    let sampler = ConditionalSampler::new(kernel, observed_surplus, horizon)?;
    let u = observed_surplus[0];
    let first = map_indexed(replicates, |i| {
        first_ruin(&sampler.sample_levels(&mut replicate_rng(seed, i as u64)))
    });
    Ok(RuinEstimate::from_first_ruins(u, horizon, &first))
}

/// Independent increments with the same marginal variance as `kernel`.
pub fn uncorrelated_counterpart<K: Covariance + ?Sized>(kernel: &K) -> Result<Kernel> {
    Kernel::white_noise(kernel.variance())
}

/// `ψ_correlated(t) / ψ_uncorrelated(t)`; `None` where the denominator is 0.
pub fn ruin_quotient(correlated: &RuinEstimate, uncorrelated: &RuinEstimate) -> Result<Vec<Option<f64>>> {
    if correlated.u != uncorrelated.u
        || correlated.horizon != uncorrelated.horizon
        || correlated.replicates != uncorrelated.replicates
    {
        return Err(Error::MismatchedConfiguration(alloc::format!(
            "(u, horizon, replicates) differ: ({}, {}, {}) vs ({}, {}, {})",
            correlated.u,
            correlated.horizon,
            correlated.replicates,
            uncorrelated.u,
            uncorrelated.horizon,
            uncorrelated.replicates
        )));
    }
    Ok(correlated
        .psi_curve
        .iter()
        .zip(&uncorrelated.psi_curve)
        .map(|(a, b)| if *b == 0.0 { None } else { Some(a / b) })
        .collect())
}
