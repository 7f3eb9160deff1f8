//! Fisher information for the constant trend `θ` and the range parameter `r`
//! of a stationary Gaussian process observed on a design.
//!
//! `M_θ = 1ᵀ C⁻¹ 1` and `M_r = ½ tr(C⁻¹ ∂C C⁻¹ ∂C)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{Covariance, Kernel};
use crate::matalg::{self, kernel_matrix, Cholesky, CovMatrix, Design, Matrix};
use crate::math::{exp, expm1};

/// Fisher information summary for one (kernel, design) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherReport {
    pub m_theta: f64,
    pub m_r: f64,
    pub lb: f64,
    pub ub: f64,
    pub n: usize,
    pub distances: Vec<f64>,
}

/// Factors `C`, classifying a failure as singular (PSD but rank deficient)
/// or not positive definite.
fn factor(matrix: &Matrix) -> Result<Cholesky> {
    Cholesky::factor(matrix).map_err(|err| match err {
        Error::NotPositiveDefinite { pivot, .. } => {
            let psd = CovMatrix::from_matrix(matrix.clone())
                .map(|m| m.certificate().passed)
                .unwrap_or(false);
            if psd {
                Error::SingularMatrix { pivot }
            } else {
                err
            }
        }
        other => other,
    })
}

/// `1ᵀ C⁻¹ 1` from one linear solve.
pub fn m_theta<K: Covariance + ?Sized>(kernel: &K, design: &Design) -> Result<f64> {
    let c = kernel_matrix(kernel, design.points());
    let ch = factor(&c)?;
    let ones = alloc::vec![1.0; design.len()];
    Ok(ch.solve(&ones).iter().sum())
}

/// `M_θ` of a normalized OU process on `n` equispaced points with spacing
/// `d`: `(2 - n + n e^{rd}) / (1 + e^{rd})`.
pub fn m_theta_ou_closed(n: usize, r: f64, d: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    // Divided through by e^{rd} so large rd does not overflow.
    let q = exp(-r * d);
    let n = n as f64;
    (n - (n - 2.0) * q) / (1.0 + q)
}

/// `M_θ` of a normalized OU process for arbitrary consecutive distances:
/// `1 + Σ (e^{r d_i} - 1)/(e^{r d_i} + 1)`.
pub fn m_theta_ou_distances(r: f64, distances: &[f64]) -> f64 {
    1.0 + distances.iter().map(|d| libm::tanh(0.5 * r * d)).sum::<f64>()
}

/// `M_r` of a normalized OU process: `Σ d_i² (e^{2rd_i} + 1)/(e^{2rd_i} - 1)²`.
/// A zero distance contributes its limit `1/(2r²)`.
pub fn m_r_ou_closed(r: f64, distances: &[f64]) -> f64 {
    distances
        .iter()
        .map(|&d| {
            if d == 0.0 {
                return 0.5 / (r * r);
            }
            let q = exp(-2.0 * r * d);
            let den = expm1(-2.0 * r * d);
            d * d * q * (1.0 + q) / (den * den)
        })
        .sum()
}

/// `M_r` for two points at distance `d` under a nugget OU kernel with
/// correlation `α e^{-rd}` off the diagonal.
pub fn m_r_nugget_two_point(alpha: f64, r: f64, d: f64) -> f64 {
    let a2q = alpha * alpha * exp(-2.0 * d * r);
    let den = 1.0 - a2q;
    d * d * a2q * (a2q + 1.0) / (den * den)
}

/// Default finite-difference step for the range parameter.
pub fn default_dr(kernel: &Kernel) -> f64 {
    1e-6 * kernel.range_parameter().unwrap_or(1.0)
}

/// Entrywise `∂C/∂r`: analytic where the family provides it, otherwise a
/// central difference with step `dr`.
pub fn d_range_matrix(kernel: &Kernel, design: &Design, dr: f64) -> Result<Matrix> {
    let points = design.points();
    let n = points.len();
    if kernel.d_range(1.0).is_some() {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // d_range exists for every distance when it exists for one.
                m[(i, j)] = kernel.d_range(points[i] - points[j]).unwrap_or(0.0);
            }
        }
        return Ok(m);
    }
    let Some(r) = kernel.range_parameter() else {
        return Ok(Matrix::zeros(n, n));
    };
    if !(dr > 0.0 && dr < r) {
        return Err(Error::invalid(alloc::format!(
            "finite-difference step {dr} must lie in (0, {r})"
        )));
    }
    for kink in kernel.range_kinks() {
        for i in 0..n {
            for j in 0..i {
                let d = points[i] - points[j];
                if (d - kink).abs() <= dr {
                    return Err(Error::invalid(alloc::format!(
                        "distance {d} sits on the kink of C in its range parameter {kink}; \
                         the range derivative is one-sided there"
                    )));
                }
            }
        }
    }
    let up = kernel_matrix(&kernel.with_range_parameter(r + dr)?, points);
    let down = kernel_matrix(&kernel.with_range_parameter(r - dr)?, points);
    Ok(Matrix::from_fn(n, n, |i, j| (up[(i, j)] - down[(i, j)]) / (2.0 * dr)))
}

/// `½ tr(C⁻¹ ∂C C⁻¹ ∂C)`.
pub fn m_r(kernel: &Kernel, design: &Design, dr: f64) -> Result<f64> {
    let c = kernel_matrix(kernel, design.points());
    let ch = factor(&c)?;
    let dc = d_range_matrix(kernel, design, dr)?;
    Ok(half_trace(&ch.solve_matrix(&dc)))
}

/// `½ tr(X²)`.
fn half_trace(x: &Matrix) -> f64 {
    let n = x.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x[(i, j)] * x[(j, i)];
        }
    }
    0.5 * s
}

/// `(n / λ_max(C), n / λ_min(C))`, the spectral sandwich around `M_θ`.
/// The upper bound is infinite when `C` is singular.
pub fn bounds<K: Covariance + ?Sized>(kernel: &K, design: &Design) -> Result<(f64, f64)> {
    let c = CovMatrix::from_matrix(kernel_matrix(kernel, design.points()))?;
    let (lo, hi) = matalg::eig_extremes(&c)?;
    let n = design.len() as f64;
    let ub = if lo > 0.0 { n / lo } else { f64::INFINITY };
    Ok((n / hi, ub))
}

pub fn report(kernel: &Kernel, design: &Design, dr: f64) -> Result<FisherReport> {
    let m_theta = m_theta(kernel, design)?;
    let m_r = m_r(kernel, design, dr)?;
    let (lb, ub) = bounds(kernel, design)?;
    Ok(FisherReport {
        m_theta,
        m_r,
        lb,
        ub,
        n: design.len(),
        distances: design.distances(),
    })
}

/// `(M_θ,c / M_θ,1, M_r,c / M_r,1)` for a nugget kernel against its
/// continuous counterpart.
pub fn effectiveness(
    kernel_c: &Kernel,
    kernel_1: &Kernel,
    design: &Design,
    dr: f64,
) -> Result<(f64, f64)> {
    let theta = m_theta(kernel_c, design)? / m_theta(kernel_1, design)?;
    let r = m_r(kernel_c, design, dr)? / m_r(kernel_1, design, dr)?;
    Ok((theta, r))
}

/// `M_θ = 2 / (2 - γ(d))` for a two-point design under a normalized
/// variogram.
pub fn m_theta_two_point_variogram(gamma_d: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&gamma_d) {
        return Err(Error::invalid(alloc::format!(
            "two-point variogram value must lie in [0, 2), got {gamma_d}"
        )));
    }
    Ok(2.0 / (2.0 - gamma_d))
}

/// `M_θ(n) / M_θ(n - 1)` for equispaced designs with spacing `d`.
pub fn theta_ratio<K: Covariance + ?Sized>(kernel: &K, n: usize, d: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("the ratio needs n >= 2"));
    }
    let top = m_theta(kernel, &Design::equispaced(n, d, 0.0)?)?;
    // A single point carries information 1/C(0).
    let bottom = if n == 2 {
        1.0 / kernel.variance()
    } else {
        m_theta(kernel, &Design::equispaced(n - 1, d, 0.0)?)?
    };
    Ok(top / bottom)
}
