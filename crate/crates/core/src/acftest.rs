//! Empirical autocorrelation and the sum-of-residuals statistic
//! `T = Σ_L |ρ(L) - ρ̂(L)|` for detecting jumps in a covariance function.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Binomial, Distribution, Gamma, Poisson, Uniform};

use crate::error::{Error, Result};
use crate::kernels::{Covariance, Jump, Kernel};
use crate::par::map_indexed;
use crate::rng::{replicate_rng, ReplicateRng};
use crate::simulate::GaussianSampler;
use crate::stats;

/// `ρ̂(L)` for `L = 0..=max_lag`, using the overall mean and the divisor `n`
/// for every lag.
pub fn empirical_acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if max_lag >= n {
        return Err(Error::invalid(alloc::format!(
            "max lag {max_lag} needs a series longer than {n}"
        )));
    }
    let mean = stats::mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    acf.push(1.0);
    for lag in 1..=max_lag {
        let s: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum();
        acf.push(s / denom);
    }
    Ok(acf)
}

/// `ρ(L) = C(L)/C(0)` for `L = 0..=max_lag`.
pub fn theoretical_acf<K: Covariance + ?Sized>(kernel: &K, max_lag: usize) -> Vec<f64> {
    let var = kernel.variance();
    let mut acf: Vec<f64> = (0..=max_lag).map(|l| kernel.eval(l as f64) / var).collect();
    acf[0] = 1.0;
    acf
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcfPair {
    pub theoretical: Vec<f64>,
    pub empirical: Vec<f64>,
    pub n: usize,
}

impl AcfPair {
    pub fn new<K: Covariance + ?Sized>(kernel: &K, x: &[f64], lags: usize) -> Result<Self> {
        if lags == 0 {
            return Err(Error::invalid("at least one lag is needed"));
        }
        Ok(AcfPair {
            theoretical: theoretical_acf(kernel, lags - 1),
            empirical: empirical_acf(x, lags - 1)?,
            n: x.len(),
        })
    }

    pub fn residual_stat(&self) -> ResidualStat {
        let t_value = self
            .theoretical
            .iter()
            .zip(&self.empirical)
            .map(|(a, b)| (a - b).abs())
            .sum();
        ResidualStat {
            t_value,
            lags_used: self.theoretical.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStat {
    pub t_value: f64,
    pub lags_used: usize,
}

/// `T` over lags `0..n`.
pub fn sum_of_residuals<K: Covariance + ?Sized>(kernel: &K, x: &[f64]) -> Result<ResidualStat> {
    sum_of_residuals_lags(kernel, x, x.len())
}

/// `T` over lags `0..lags`.
pub fn sum_of_residuals_lags<K: Covariance + ?Sized>(
    kernel: &K,
    x: &[f64],
    lags: usize,
) -> Result<ResidualStat> {
    Ok(AcfPair::new(kernel, x, lags)?.residual_stat())
}

/// Distribution of the jump height(s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CLaw {
    Fixed(f64),
    Uniform01,
    /// Gamma(shape, rate); draws above 1 are rejected.
    GammaTrunc { shape: f64, rate: f64 },
    /// Poisson(lambda) / scale; draws above 1 are rejected.
    PoissonScaled { lambda: f64, scale: f64 },
    /// Binomial(trials, p) / scale.
    BinomialScaled { trials: u64, p: f64, scale: f64 },
    /// Three nested heights `c1 ~ U(0,1)`, `c2 ~ U(0,c1)`, `c3 ~ U(0,c2)` at
    /// the lags of [`NESTED_LAGS`].
    NestedUniform,
}

/// Lags of the three bands used by [`CLaw::NestedUniform`].
pub const NESTED_LAGS: [f64; 3] = [1.0, 30.0, 73.0];

impl CLaw {
    pub fn name(&self) -> String {
        match self {
            CLaw::Fixed(c) => alloc::format!("fixed({c})"),
            CLaw::Uniform01 => "uniform".into(),
            CLaw::GammaTrunc { shape, rate } => alloc::format!("gamma({shape},{rate})"),
            CLaw::PoissonScaled { lambda, scale } => alloc::format!("poisson({lambda})/{scale}"),
            CLaw::BinomialScaled { trials, p, scale } => {
                alloc::format!("binomial({trials},{p})/{scale}")
            }
            CLaw::NestedUniform => "nested-uniform".into(),
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            CLaw::Fixed(c) => (0.0..=1.0).contains(&c),
            CLaw::Uniform01 | CLaw::NestedUniform => true,
            CLaw::GammaTrunc { shape, rate } => shape > 0.0 && rate > 0.0,
            CLaw::PoissonScaled { lambda, scale } => lambda > 0.0 && scale > 0.0,
            CLaw::BinomialScaled { p, scale, .. } => (0.0..=1.0).contains(&p) && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(alloc::format!("invalid jump-height law {}", self.name())))
        }
    }

    /// One draw of the height vector (one entry, three for nested).
    pub fn draw(&self, rng: &mut ReplicateRng) -> Vec<f64> {
        let unit = Uniform::new(0.0, 1.0).expect("valid range");
        match *self {
            CLaw::Fixed(c) => vec![c],
            CLaw::Uniform01 => vec![unit.sample(rng)],
            CLaw::GammaTrunc { shape, rate } => {
                let g = Gamma::new(shape, 1.0 / rate).expect("checked parameters");
                vec![g.sample(rng)]
            }
            CLaw::PoissonScaled { lambda, scale } => {
                let p = Poisson::new(lambda).expect("checked parameters");
                vec![p.sample(rng) / scale]
            }
            CLaw::BinomialScaled { trials, p, scale } => {
                let b = Binomial::new(trials, p).expect("checked parameters");
                vec![b.sample(rng) as f64 / scale]
            }
            CLaw::NestedUniform => {
                let c1: f64 = unit.sample(rng);
                let c2 = c1 * unit.sample(rng);
                let c3 = c2 * unit.sample(rng);
                vec![c1, c2, c3]
            }
        }
    }
}

/// Kernel for one height draw: white noise for `c = 0`, a nugget OU kernel
/// for a single height, a banded kernel for nested heights.
pub fn kernel_for_heights(r: f64, heights: &[f64]) -> Result<Kernel> {
    match heights {
        [c] if *c == 0.0 => Kernel::white_noise(1.0),
        [c] => Kernel::nugget_ou(1.0, r, *c),
        hs => {
            let jumps = hs.iter().zip(NESTED_LAGS).map(|(&h, lag)| Jump::new(lag, h)).collect();
            Kernel::multi_jump(1.0, r, jumps)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CDraw {
    pub c: Vec<f64>,
    pub t_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TDistribution {
    pub samples: Vec<CDraw>,
    pub attempts: u64,
    pub rejected: u64,
}

impl TDistribution {
    pub fn rejection_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.rejected as f64 / self.attempts as f64
        }
    }

    /// More than half of all height draws were rejected.
    pub fn warning(&self) -> bool {
        self.rejection_rate() > 0.5
    }
}

/// Attempts per replicate before the law is declared unusable.
pub const MAX_ATTEMPTS: u64 = 10_000;

/// Monte-Carlo sample of `(c, T)`: per replicate, draw heights (redrawing
/// when a height exceeds 1 or the covariance matrix is not positive
/// definite), simulate `n` increments and compute `T` over `lags` lags.
pub fn t_distribution_mc(
    law: CLaw,
    n: usize,
    r: f64,
    replicates: usize,
    seed: u64,
    lags: Option<usize>,
) -> Result<TDistribution> {
    law.check()?;
    if n < 2 {
        return Err(Error::invalid("series length must be at least 2"));
    }
    let lags = lags.unwrap_or(n);
    let runs = map_indexed(replicates, |i| -> Result<(CDraw, u64)> {
        let mut rng = replicate_rng(seed, i as u64);
        for attempt in 0..MAX_ATTEMPTS {
            let c = law.draw(&mut rng);
            if c.iter().any(|h| !(0.0..=1.0).contains(h)) {
                continue;
            }
            let Ok(kernel) = kernel_for_heights(r, &c) else {
                continue;
            };
            let Ok(sampler) = GaussianSampler::new(&kernel, n) else {
                continue;
            };
            let x = sampler.draw(&mut rng);
            let t = sum_of_residuals_lags(&kernel, &x, lags)?;
            return Ok((CDraw { c, t_value: t.t_value }, attempt));
        }
        Err(Error::Infeasible(alloc::format!(
            "{} produced no usable height in {MAX_ATTEMPTS} draws",
            law.name()
        )))
    });
    let mut samples = Vec::with_capacity(replicates);
    let mut rejected = 0;
    for run in runs {
        let (draw, rej) = run?;
        rejected += rej;
        samples.push(draw);
    }
    Ok(TDistribution {
        attempts: samples.len() as u64 + rejected,
        samples,
        rejected,
    })
}

/// Mean of `T` over replicates for one fixed kernel; replicate `i` reads
/// stream `i`, so scenarios run with the same seed share their noise.
pub fn mean_t(kernel: &Kernel, n: usize, replicates: usize, seed: u64, lags: Option<usize>) -> Result<(f64, f64)> {
    let sampler = GaussianSampler::new(kernel, n)?;
    let lags = lags.unwrap_or(n);
    let ts = map_indexed(replicates, |i| {
        let x = sampler.draw_replicate(seed, i as u64);
        sum_of_residuals_lags(kernel, &x, lags).map(|t| t.t_value)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok((stats::mean(&ts), stats::std_error(&ts)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    /// Number of jumps, 1 to 4.
    pub jumps: usize,
    pub label: String,
    pub bands: Vec<Jump>,
    /// `NaN` when the scenario's covariance is not positive definite.
    pub mean_t: f64,
    pub std_error: f64,
    pub error: Option<String>,
}

/// Bands of every scenario in the jump comparison table.
pub fn table1_scenarios() -> Vec<(usize, String, Vec<Jump>)> {
    let mut out = Vec::new();
    for c in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let bands = if c == 0.0 { Vec::new() } else { vec![Jump::new(1.0, c)] };
        out.push((1, alloc::format!("c={c}"), bands));
    }
    for s in 30..=99 {
        out.push((2, alloc::format!("s={s}"), vec![Jump::new(1.0, 0.8), Jump::new(s as f64, 0.7)]));
    }
    for s in [73, 75, 85, 98] {
        out.push((
            3,
            alloc::format!("s={s}"),
            vec![Jump::new(1.0, 0.8), Jump::new(30.0, 0.7), Jump::new(s as f64, 0.6)],
        ));
    }
    out.push((
        4,
        "s=(30,73,88)".into(),
        vec![
            Jump::new(1.0, 0.8),
            Jump::new(30.0, 0.7),
            Jump::new(73.0, 0.6),
            Jump::new(88.0, 0.5),
        ],
    ));
    out
}

fn scenario_kernel(r: f64, bands: &[Jump]) -> Result<Kernel> {
    match bands {
        [] => Kernel::white_noise(1.0),
        [j] if j.lag == 1.0 => Kernel::nugget_ou(1.0, r, j.height),
        _ => Kernel::multi_jump(1.0, r, bands.to_vec()),
    }
}

/// Mean `T` for every scenario of [`table1_scenarios`]. All scenarios share
/// the replicate noise streams.
pub fn table1_experiment(r: f64, n: usize, replicates: usize, seed: u64) -> Result<Vec<Table1Row>> {
    if replicates < 2 {
        return Err(Error::invalid("at least two replicates are needed"));
    }
    table1_scenarios()
        .into_iter()
        .map(|(jumps, label, bands)| {
            let kernel = scenario_kernel(r, &bands)?;
            let (mean_t, std_error, error) = match mean_t(&kernel, n, replicates, seed, None) {
                Ok((m, se)) => (m, se, None),
                Err(e @ Error::NotPositiveDefinite { .. }) => (f64::NAN, f64::NAN, Some(alloc::format!("{e}"))),
                Err(e) => return Err(e),
            };
            Ok(Table1Row {
                jumps,
                label,
                bands,
                mean_t,
                std_error,
                error,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_degenerate() {
        assert_eq!(empirical_acf(&[2.0; 10], 3), Err(Error::DegenerateSeries));
    }

    #[test]
    fn alternating_series() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let acf = empirical_acf(&x, 2).unwrap();
        assert_eq!(acf[0], 1.0);
        assert!((acf[1] + 1.0).abs() < 2e-3);
        assert!((acf[2] - 1.0).abs() < 3e-3);
    }

    #[test]
    fn acf_is_bounded() {
        let x = [0.3, -1.2, 2.5, 0.1, 0.9, -0.4, 1.7];
        let acf = empirical_acf(&x, 6).unwrap();
        assert!(acf.iter().all(|v| v.abs() <= 1.0));
        assert!(empirical_acf(&x, 7).is_err());
    }

    #[test]
    fn residual_stat_recomputes_from_pair() {
        let k = Kernel::ou(1.0, 0.2).unwrap();
        let x = GaussianSampler::new(&k, 50).unwrap().draw_replicate(4, 0);
        let pair = AcfPair::new(&k, &x, 50).unwrap();
        let stat = pair.residual_stat();
        let direct: f64 = (0..50).map(|l| (pair.theoretical[l] - pair.empirical[l]).abs()).sum();
        assert_eq!(stat.t_value, direct);
        assert_eq!(stat.lags_used, 50);
        assert_eq!(sum_of_residuals(&k, &x).unwrap(), stat);
    }

    #[test]
    fn single_replicate_is_deterministic() {
        let a = t_distribution_mc(CLaw::Uniform01, 100, 0.01, 1, 17, None).unwrap();
        let b = t_distribution_mc(CLaw::Uniform01, 100, 0.01, 1, 17, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 1);
    }

    #[test]
    fn heavy_tailed_laws_reject_large_heights() {
        let d = t_distribution_mc(CLaw::GammaTrunc { shape: 2.0, rate: 1.0 }, 30, 0.05, 200, 3, None).unwrap();
        assert!(d.samples.iter().all(|s| s.c[0] <= 1.0));
        assert!(d.rejected > 0);
        // P(Gamma(2,1) > 1) = 2/e, about 0.74.
        assert!(d.warning());
        let p = t_distribution_mc(
            CLaw::PoissonScaled { lambda: 5.0, scale: 10.0 },
            30,
            0.05,
            100,
            3,
            None,
        )
        .unwrap();
        assert!(!p.warning());
    }

    #[test]
    fn nested_heights_decrease() {
        let d = t_distribution_mc(CLaw::NestedUniform, 100, 0.01, 50, 8, None).unwrap();
        for s in &d.samples {
            assert_eq!(s.c.len(), 3);
            assert!(s.c[0] > s.c[1] && s.c[1] > s.c[2]);
        }
    }

    #[test]
    fn scenarios_cover_table() {
        let sc = table1_scenarios();
        assert_eq!(sc.len(), 6 + 70 + 4 + 1);
        for (_, _, bands) in &sc {
            if !bands.is_empty() {
                assert!(scenario_kernel(0.01, bands).is_ok());
            }
        }
    }
}
