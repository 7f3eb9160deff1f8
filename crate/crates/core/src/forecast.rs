//! Conditional forecasts of a correlated random walk.
//!
//! The observed increments `x` are whitened with the Cholesky factor of
//! their own covariance, `z = A⁻¹ x`. Fresh standard normals extend `z`, and
//! the factor `A*` of the covariance of observed plus future increments maps
//! the extended vector back. The leading block of `A*` is `A`, so every
//! simulated path reproduces the observed history exactly.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::Covariance;
use crate::matalg::{dot, unit_lag_matrix, Cholesky, Matrix};
use crate::par::map_indexed;
use crate::rng::{replicate_rng, standard_normals, ReplicateRng};
use crate::simulate::cumulative_sum;
use crate::stats;

/// First differences of a walk: `m` levels give `m - 1` increments.
pub fn increments_of(walk: &[f64]) -> Vec<f64> {
    walk.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Shared state of a conditional simulation: the full factor and the
/// whitened history.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSampler {
    full: Matrix,
    observed: Vec<f64>,
    z_prefix: Vec<f64>,
    /// Contribution of the whitened history to each future increment.
    offsets: Vec<f64>,
    last_level: f64,
    horizon: usize,
}

impl ConditionalSampler {
    pub fn new<K: Covariance + ?Sized>(kernel: &K, observed_walk: &[f64], horizon: usize) -> Result<Self> {
        if observed_walk.len() < 2 {
            return Err(Error::DimensionMismatch(alloc::format!(
                "an observed walk needs at least 2 levels, got {}",
                observed_walk.len()
            )));
        }
        if observed_walk.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("observed walk contains non-finite values"));
        }
        let observed = increments_of(observed_walk);
        let m = observed.len();
        let full = Cholesky::factor(&unit_lag_matrix(kernel, m + horizon))?.into_l();
        let z_prefix = crate::matalg::forward_substitution(&full, &observed);
        let offsets = (m..m + horizon)
            .map(|k| dot(&full.row(k)[..m], &z_prefix))
            .collect();
        Ok(ConditionalSampler {
            full,
            observed,
            z_prefix,
            offsets,
            last_level: observed_walk[observed_walk.len() - 1],
            horizon,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn observed_increments(&self) -> &[f64] {
        &self.observed
    }

    /// Whitened history `A⁻¹ x`.
    pub fn whitened(&self) -> &[f64] {
        &self.z_prefix
    }

    pub fn last_level(&self) -> f64 {
        self.last_level
    }

    /// Full back-transformed increment vector `A* (z, z_tail)`.
    pub fn full_increments(&self, z_tail: &[f64]) -> Vec<f64> {
        let mut z = self.z_prefix.clone();
        z.extend_from_slice(z_tail);
        crate::matalg::lower_mul(&self.full, &z)
    }

    /// Future increments for a given tail of standard normals.
    pub fn future_increments(&self, z_tail: &[f64]) -> Vec<f64> {
        let m = self.observed.len();
        (0..self.horizon)
            .map(|j| {
                let k = m + j;
                self.offsets[j] + dot(&self.full.row(k)[m..=k], &z_tail[..=j])
            })
            .collect()
    }

    /// Future levels continuing from the last observed level.
    pub fn future_levels(&self, z_tail: &[f64]) -> Vec<f64> {
        cumulative_sum(&self.future_increments(z_tail))
            .into_iter()
            .map(|s| s + self.last_level)
            .collect()
    }

    pub fn sample_levels(&self, rng: &mut ReplicateRng) -> Vec<f64> {
        self.future_levels(&standard_normals(rng, self.horizon))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub horizon: usize,
    /// Per-step median.
    pub point_forecast: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower_band: Vec<f64>,
    pub upper_band: Vec<f64>,
    pub replicates: usize,
    pub alpha: f64,
}

/// Per-step median, mean and `(α/2, 1 - α/2)` quantiles over replicated
/// paths. `paths[i][t]` is step `t` of replicate `i`.
pub fn summarize(paths: &[Vec<f64>], horizon: usize, alpha: f64) -> ForecastResult {
    let mut result = ForecastResult {
        horizon,
        point_forecast: Vec::with_capacity(horizon),
        mean: Vec::with_capacity(horizon),
        lower_band: Vec::with_capacity(horizon),
        upper_band: Vec::with_capacity(horizon),
        replicates: paths.len(),
        alpha,
    };
    let mut column = Vec::with_capacity(paths.len());
    for t in 0..horizon {
        column.clear();
        column.extend(paths.iter().map(|p| p[t]));
        column.sort_by(f64::total_cmp);
        result.lower_band.push(stats::quantile_sorted(&column, alpha / 2.0));
        result.point_forecast.push(stats::quantile_sorted(&column, 0.5));
        result.upper_band.push(stats::quantile_sorted(&column, 1.0 - alpha / 2.0));
        result.mean.push(stats::mean(&column));
    }
    result
}

/// Forecasts `horizon` steps of a walk whose increments follow `kernel`.
/// A zero horizon yields an empty result.
pub fn forecast<K: Covariance + ?Sized>(
    kernel: &K,
    observed_walk: &[f64],
    horizon: usize,
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<ForecastResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(alloc::format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if replicates == 0 {
        return Err(Error::invalid("at least one replicate is needed"));
    }
    let sampler = ConditionalSampler::new(kernel, observed_walk, horizon)?;
    let paths = map_indexed(replicates, |i| sampler.sample_levels(&mut replicate_rng(seed, i as u64)));
    Ok(summarize(&paths, horizon, alpha))
}
