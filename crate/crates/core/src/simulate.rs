//! Correlated Gaussian increments on a unit time grid and their random walks.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{Covariance, Kernel};
use crate::matalg::{lower_mul, unit_lag_matrix, Cholesky, Matrix};
use crate::par::map_indexed;
use crate::rng::{replicate_rng, standard_normals, ReplicateRng};

/// Draws `N(0, Σ)` vectors as `L z` with `L Lᵀ = Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSampler {
    l: Matrix,
}

impl GaussianSampler {
    /// Sampler for `t_max` consecutive unit-spaced observations.
    pub fn new<K: Covariance + ?Sized>(kernel: &K, t_max: usize) -> Result<Self> {
        if t_max == 0 {
            return Err(Error::invalid("t_max must be at least 1"));
        }
        Self::from_covariance(&unit_lag_matrix(kernel, t_max))
    }

    pub fn from_covariance(sigma: &Matrix) -> Result<Self> {
        Ok(GaussianSampler {
            l: Cholesky::factor(sigma)?.into_l(),
        })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// `L z`.
    pub fn transform(&self, z: &[f64]) -> Vec<f64> {
        lower_mul(&self.l, z)
    }

    pub fn draw(&self, rng: &mut ReplicateRng) -> Vec<f64> {
        self.transform(&standard_normals(rng, self.dim()))
    }

    /// Increments of replicate `replicate` under `seed`.
    pub fn draw_replicate(&self, seed: u64, replicate: u64) -> Vec<f64> {
        self.draw(&mut replicate_rng(seed, replicate))
    }
}

/// Running sums `Y_t = Σ_{i ≤ t} x_i`.
pub fn cumulative_sum(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// Replicated increments and walks. Row `i` comes from RNG stream `i`
/// under `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub increments: Vec<Vec<f64>>,
    pub walks: Vec<Vec<f64>>,
    pub seed: u64,
    pub kernel: Kernel,
}

impl PathEnsemble {
    pub fn replicates(&self) -> usize {
        self.increments.len()
    }

    pub fn t_max(&self) -> usize {
        self.increments.first().map_or(0, Vec::len)
    }
}

pub fn sample_increments(
    kernel: &Kernel,
    t_max: usize,
    replicates: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    let sampler = GaussianSampler::new(kernel, t_max)?;
    let increments = map_indexed(replicates, |i| sampler.draw_replicate(seed, i as u64));
    let walks = increments.iter().map(|x| cumulative_sum(x)).collect();
    Ok(PathEnsemble {
        increments,
        walks,
        seed,
        kernel: kernel.clone(),
    })
}

/// Two walks driven by the same standard normal vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledComparison {
    pub walk_a: Vec<f64>,
    pub walk_b: Vec<f64>,
    /// `walk_a - walk_b` per time step.
    pub difference: Vec<f64>,
    pub max_abs_difference: f64,
}

pub fn compare_coupled<A, B>(kernel_a: &A, kernel_b: &B, t_max: usize, seed: u64) -> Result<CoupledComparison>
where
    A: Covariance + ?Sized,
    B: Covariance + ?Sized,
{
    let a = GaussianSampler::new(kernel_a, t_max)?;
    let b = GaussianSampler::new(kernel_b, t_max)?;
    let z = standard_normals(&mut replicate_rng(seed, 0), t_max);
    let walk_a = cumulative_sum(&a.transform(&z));
    let walk_b = cumulative_sum(&b.transform(&z));
    let difference: Vec<f64> = walk_a.iter().zip(&walk_b).map(|(x, y)| x - y).collect();
    let max_abs_difference = difference.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
    Ok(CoupledComparison {
        walk_a,
        walk_b,
        difference,
        max_abs_difference,
    })
}

/// Height of the nugget kernel compared against the banded kernel; it
/// matches the banded kernel's first band.
pub const NUGGET_HEIGHT: f64 = 0.8;

/// Case A is a nugget OU kernel (one jump at the origin, height 0.8); case B
/// is the four-band kernel [`Kernel::several_jumps`]. Both share `r` and the
/// driving noise.
pub fn compare_nugget_vs_jumps(r: f64, t_max: usize, seed: u64) -> Result<CoupledComparison> {
    let nugget = Kernel::nugget_ou(1.0, r, NUGGET_HEIGHT)?;
    let jumps = Kernel::several_jumps(r)?;
    compare_coupled(&nugget, &jumps, t_max, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn walks_are_cumulative_sums() {
        let k = Kernel::nugget_ou(1.0, 0.3, 0.7).unwrap();
        let ens = sample_increments(&k, 20, 5, 11).unwrap();
        assert_eq!(ens.replicates(), 5);
        assert_eq!(ens.t_max(), 20);
        for (x, y) in ens.increments.iter().zip(&ens.walks) {
            let mut acc = 0.0;
            for (xi, yi) in x.iter().zip(y) {
                acc += xi;
                assert_eq!(acc, *yi);
            }
        }
    }

    #[test]
    fn replicates_are_reproducible_by_index() {
        let k = Kernel::ou(1.0, 0.5).unwrap();
        let ens = sample_increments(&k, 10, 4, 99).unwrap();
        let sampler = GaussianSampler::new(&k, 10).unwrap();
        assert_eq!(ens.increments[3], sampler.draw_replicate(99, 3));
        assert_eq!(ens, sample_increments(&k, 10, 4, 99).unwrap());
        assert_ne!(ens.increments[0], ens.increments[1]);
    }

    #[test]
    fn white_noise_lag_one_is_uncorrelated() {
        let k = Kernel::white_noise(1.0).unwrap();
        let reps = 4000;
        let ens = sample_increments(&k, 3, reps, 5).unwrap();
        let a: Vec<f64> = ens.increments.iter().map(|x| x[0]).collect();
        let b: Vec<f64> = ens.increments.iter().map(|x| x[1]).collect();
        assert!(stats::correlation(&a, &b).abs() < 3.0 / libm::sqrt(reps as f64));
    }

    #[test]
    fn several_jumps_are_simulable_at_small_r() {
        let k = Kernel::several_jumps(0.01).unwrap();
        assert!(sample_increments(&k, 100, 2, 1).is_ok());
    }

    #[test]
    fn identical_kernels_give_zero_difference() {
        let k = Kernel::several_jumps(0.1).unwrap();
        let cmp = compare_coupled(&k, &k, 50, 3).unwrap();
        assert!(cmp.difference.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn nugget_versus_jumps() {
        assert!(compare_nugget_vs_jumps(1.0, 100, 7).unwrap().max_abs_difference < 1e-12);
        assert!(compare_nugget_vs_jumps(0.025, 100, 7).unwrap().max_abs_difference > 0.1);
    }

    #[test]
    fn non_psd_kernel_is_rejected() {
        // A step kernel with a long plateau is not positive definite on a
        // long unit grid.
        let k = Kernel::step(1.0, 1.0, 40.0).unwrap();
        assert!(matches!(
            GaussianSampler::new(&k, 100),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
