//! Covariance kernels on the half line `d >= 0`.
//!
//! Every kernel is isotropic: it is a function of the distance `d = |s - t|`
//! only. The catalog covers the Ornstein-Uhlenbeck (OU) family and its
//! semicontinuous relatives (nugget, banded multi-jump, step, truncated), the
//! power-exponential family, the modified Näther triangle and the three
//! classical variogram models converted to covariances.
//!
//! A kernel belongs to the abc class when it is normalized and nonnegative
//! (a), nonincreasing and almost everywhere convex on `(0, inf)` (b) and
//! vanishes at infinity (c). [`validate_abc`] checks these properties on a
//! grid; [`psi_of`] gives the representation `C(d) = σ² exp(-ψ(d))`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{exp, ln, powf};

/// Anything that can be evaluated as an isotropic covariance function.
pub trait Covariance {
    /// `C(d)`. Negative distances are treated as `|d|`.
    fn eval(&self, d: f64) -> f64;

    /// The declared variance `C(0)`.
    fn variance(&self) -> f64 {
        self.eval(0.0)
    }

    /// Lags at which the function may jump. The origin counts when the
    /// kernel carries a nugget.
    fn discontinuities(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// One jump of a banded kernel: from `lag` on (inclusive) the correlation is
/// multiplied by `height` until the next jump takes over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub lag: f64,
    pub height: f64,
}

impl Jump {
    pub fn new(lag: f64, height: f64) -> Self {
        Jump { lag, height }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariogramModel {
    Linear,
    Spherical,
    Exponential,
}

/// Parameters of each kernel family; `σ²` lives on [`Kernel`].
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `σ² e^{-rd}`.
    Ou { r: f64 },
    /// `σ²` at the origin, `c σ² e^{-rd}` elsewhere.
    NuggetOu { r: f64, c: f64 },
    /// `h(d) σ² e^{-rd}` with `h` piecewise constant over half-open bands
    /// `[lag_k, lag_{k+1})`; `h = 1` below the first lag.
    MultiJumpExp { r: f64, jumps: Vec<Jump> },
    /// `σ²` at the origin, `c σ² e^{-r d^p}` elsewhere.
    PowerExp { r: f64, c: f64, p: f64 },
    /// `σ²` at the origin, `c σ²` on `(0, range]`, zero beyond.
    Step { c: f64, range: f64 },
    /// `σ² (1 - d / range)` below `range`, zero beyond.
    Nather { range: f64 },
    /// `σ² e^{-rd}` below `cutoff`, zero from `cutoff` on.
    TruncatedOu { r: f64, cutoff: f64 },
    /// `σ²` at the origin, zero elsewhere.
    WhiteNoise,
    /// Covariance `(τ² + σ²) - γ(d)` of a variogram model, clipped at zero.
    Variogram {
        model: VariogramModel,
        tau2: f64,
        r: f64,
    },
}

/// Fieldless family tag, used for names and config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Ou,
    NuggetOu,
    MultiJumpExp,
    PowerExp,
    Step,
    Nather,
    TruncatedOu,
    WhiteNoise,
    VariogramLinear,
    VariogramSpherical,
    VariogramExponential,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Ou,
        Family::NuggetOu,
        Family::MultiJumpExp,
        Family::PowerExp,
        Family::Step,
        Family::Nather,
        Family::TruncatedOu,
        Family::WhiteNoise,
        Family::VariogramLinear,
        Family::VariogramSpherical,
        Family::VariogramExponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ou => "ou",
            Family::NuggetOu => "nugget_ou",
            Family::MultiJumpExp => "multi_jump_exp",
            Family::PowerExp => "power_exp",
            Family::Step => "step",
            Family::Nather => "nather",
            Family::TruncatedOu => "truncated_ou",
            Family::WhiteNoise => "white_noise",
            Family::VariogramLinear => "variogram_linear",
            Family::VariogramSpherical => "variogram_spherical",
            Family::VariogramExponential => "variogram_exponential",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated covariance kernel. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    sigma2: f64,
    shape: Shape,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("{name} must be positive and finite, got {v}")))
    }
}

fn unit_height(name: &str, c: f64) -> Result<()> {
    if c > 0.0 && c <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("{name} must lie in (0, 1], got {c}")))
    }
}

fn validate_jumps(jumps: &[Jump]) -> Result<()> {
    if jumps.is_empty() {
        return Err(Error::invalid("a banded kernel needs at least one jump"));
    }
    for (i, j) in jumps.iter().enumerate() {
        if !(j.lag.is_finite() && j.lag >= 0.0) {
            return Err(Error::invalid(alloc::format!(
                "jump {i}: lag must be finite and nonnegative, got {}",
                j.lag
            )));
        }
        unit_height("jump height", j.height)?;
    }
    for (i, w) in jumps.windows(2).enumerate() {
        if w[1].lag <= w[0].lag {
            return Err(Error::invalid(alloc::format!(
                "jump lags must be strictly increasing (jump {} at {} after {})",
                i + 1,
                w[1].lag,
                w[0].lag
            )));
        }
        if w[1].height >= w[0].height {
            return Err(Error::invalid(alloc::format!(
                "jump heights must be strictly decreasing (jump {} has {} after {})",
                i + 1,
                w[1].height,
                w[0].height
            )));
        }
    }
    Ok(())
}

impl Kernel {
    pub fn new(shape: Shape, sigma2: f64) -> Result<Self> {
        positive("sigma2", sigma2)?;
        match &shape {
            Shape::Ou { r } => positive("r", *r)?,
            Shape::NuggetOu { r, c } => {
                positive("r", *r)?;
                unit_height("c", *c)?;
            }
            Shape::MultiJumpExp { r, jumps } => {
                positive("r", *r)?;
                validate_jumps(jumps)?;
            }
            Shape::PowerExp { r, c, p } => {
                positive("r", *r)?;
                unit_height("c", *c)?;
                positive("p", *p)?;
            }
            Shape::Step { c, range } => {
                unit_height("c", *c)?;
                positive("range", *range)?;
            }
            Shape::Nather { range } => positive("range", *range)?,
            Shape::TruncatedOu { r, cutoff } => {
                positive("r", *r)?;
                positive("cutoff", *cutoff)?;
            }
            Shape::WhiteNoise => {}
            Shape::Variogram { tau2, r, .. } => {
                positive("r", *r)?;
                if !(tau2.is_finite() && *tau2 >= 0.0) {
                    return Err(Error::invalid(alloc::format!(
                        "tau2 must be finite and nonnegative, got {tau2}"
                    )));
                }
            }
        }
        Ok(Kernel { sigma2, shape })
    }

    pub fn ou(sigma2: f64, r: f64) -> Result<Self> {
        Kernel::new(Shape::Ou { r }, sigma2)
    }

    pub fn nugget_ou(sigma2: f64, r: f64, c: f64) -> Result<Self> {
        Kernel::new(Shape::NuggetOu { r, c }, sigma2)
    }

    pub fn multi_jump(sigma2: f64, r: f64, jumps: Vec<Jump>) -> Result<Self> {
        Kernel::new(Shape::MultiJumpExp { r, jumps }, sigma2)
    }

    /// The four-band kernel with heights 0.8, 0.7, 0.6, 0.5 switching at
    /// lags 30, 73 and 88.
    pub fn several_jumps(r: f64) -> Result<Self> {
        Kernel::multi_jump(
            1.0,
            r,
            alloc::vec![
                Jump::new(0.0, 0.8),
                Jump::new(30.0, 0.7),
                Jump::new(73.0, 0.6),
                Jump::new(88.0, 0.5),
            ],
        )
    }

    pub fn power_exp(sigma2: f64, r: f64, c: f64, p: f64) -> Result<Self> {
        Kernel::new(Shape::PowerExp { r, c, p }, sigma2)
    }

    pub fn step(sigma2: f64, c: f64, range: f64) -> Result<Self> {
        Kernel::new(Shape::Step { c, range }, sigma2)
    }

    pub fn nather(sigma2: f64, range: f64) -> Result<Self> {
        Kernel::new(Shape::Nather { range }, sigma2)
    }

    pub fn truncated_ou(sigma2: f64, r: f64, cutoff: f64) -> Result<Self> {
        Kernel::new(Shape::TruncatedOu { r, cutoff }, sigma2)
    }

    pub fn white_noise(sigma2: f64) -> Result<Self> {
        Kernel::new(Shape::WhiteNoise, sigma2)
    }

    pub fn variogram(model: VariogramModel, sigma2: f64, tau2: f64, r: f64) -> Result<Self> {
        Kernel::new(Shape::Variogram { model, tau2, r }, sigma2)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn family(&self) -> Family {
        match &self.shape {
            Shape::Ou { .. } => Family::Ou,
            Shape::NuggetOu { .. } => Family::NuggetOu,
            Shape::MultiJumpExp { .. } => Family::MultiJumpExp,
            Shape::PowerExp { .. } => Family::PowerExp,
            Shape::Step { .. } => Family::Step,
            Shape::Nather { .. } => Family::Nather,
            Shape::TruncatedOu { .. } => Family::TruncatedOu,
            Shape::WhiteNoise => Family::WhiteNoise,
            Shape::Variogram { model, .. } => match model {
                VariogramModel::Linear => Family::VariogramLinear,
                VariogramModel::Spherical => Family::VariogramSpherical,
                VariogramModel::Exponential => Family::VariogramExponential,
            },
        }
    }

    /// The parameter the range Fisher information differentiates against:
    /// `r` for exponential-type families, the range for step, Näther and
    /// spherical kernels. `None` when the kernel has no such parameter.
    pub fn range_parameter(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ou { r }
            | Shape::NuggetOu { r, .. }
            | Shape::MultiJumpExp { r, .. }
            | Shape::PowerExp { r, .. }
            | Shape::TruncatedOu { r, .. } => Some(*r),
            Shape::Step { range, .. } | Shape::Nather { range } => Some(*range),
            Shape::WhiteNoise => None,
            Shape::Variogram { model, r, .. } => match model {
                VariogramModel::Linear => None,
                _ => Some(*r),
            },
        }
    }

    /// Same kernel with the range parameter replaced.
    pub fn with_range_parameter(&self, value: f64) -> Result<Kernel> {
        let shape = match &self.shape {
            Shape::Ou { .. } => Shape::Ou { r: value },
            Shape::NuggetOu { c, .. } => Shape::NuggetOu { r: value, c: *c },
            Shape::MultiJumpExp { jumps, .. } => Shape::MultiJumpExp {
                r: value,
                jumps: jumps.clone(),
            },
            Shape::PowerExp { c, p, .. } => Shape::PowerExp { r: value, c: *c, p: *p },
            Shape::TruncatedOu { cutoff, .. } => Shape::TruncatedOu {
                r: value,
                cutoff: *cutoff,
            },
            Shape::Step { c, .. } => Shape::Step { c: *c, range: value },
            Shape::Nather { .. } => Shape::Nather { range: value },
            Shape::Variogram { model, tau2, .. } if *model != VariogramModel::Linear => {
                Shape::Variogram {
                    model: *model,
                    tau2: *tau2,
                    r: value,
                }
            }
            _ => {
                return Err(Error::invalid(alloc::format!(
                    "{} kernel has no range parameter",
                    self.family()
                )))
            }
        };
        Kernel::new(shape, self.sigma2)
    }

    /// Analytic `∂C/∂r` where the family has one. Families whose range
    /// enters through an indicator (step, Näther) return `None` and are
    /// differentiated numerically by the caller.
    pub fn d_range(&self, d: f64) -> Option<f64> {
        let d = d.abs();
        match &self.shape {
            Shape::Ou { .. }
            | Shape::NuggetOu { .. }
            | Shape::MultiJumpExp { .. }
            | Shape::TruncatedOu { .. } => Some(if d == 0.0 { 0.0 } else { -d * self.eval(d) }),
            Shape::PowerExp { p, .. } => Some(if d == 0.0 {
                0.0
            } else {
                -powf(d, *p) * self.eval(d)
            }),
            Shape::WhiteNoise => Some(0.0),
            Shape::Variogram { model, r, .. } => match model {
                VariogramModel::Linear => Some(0.0),
                VariogramModel::Exponential => Some(if d == 0.0 {
                    0.0
                } else {
                    -d * self.sigma2 * exp(-r * d)
                }),
                VariogramModel::Spherical => Some(if d == 0.0 || d > *r {
                    0.0
                } else {
                    let r2 = r * r;
                    self.sigma2 * 1.5 * (d / r2 - d * d * d / (r2 * r2))
                }),
            },
            Shape::Step { .. } | Shape::Nather { .. } => None,
        }
    }

    /// Lags where `C` is not differentiable in its range parameter.
    pub fn range_kinks(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Step { range, .. } | Shape::Nather { range } => alloc::vec![*range],
            _ => Vec::new(),
        }
    }

    /// Semivariogram `γ(d)` of the three variogram families, `γ(0) = 0`.
    pub fn eval_variogram(&self, d: f64) -> Result<f64> {
        let Shape::Variogram { model, tau2, r } = &self.shape else {
            return Err(Error::invalid(alloc::format!(
                "{} is not a variogram model",
                self.family()
            )));
        };
        let d = d.abs();
        if d == 0.0 {
            return Ok(0.0);
        }
        let s2 = self.sigma2;
        Ok(match model {
            VariogramModel::Linear => tau2 + s2 * d,
            VariogramModel::Spherical => {
                if d <= *r {
                    let x = d / r;
                    tau2 + s2 * (1.5 * x - 0.5 * x * x * x)
                } else {
                    tau2 + s2
                }
            }
            VariogramModel::Exponential => tau2 + s2 * (1.0 - exp(-r * d)),
        })
    }

    /// A distance beyond which the kernel is negligible (`e^{-20}` scale for
    /// exponential decay, twice the support for compact kernels).
    pub fn default_dmax(&self) -> f64 {
        match &self.shape {
            Shape::Ou { r } | Shape::NuggetOu { r, .. } => 20.0 / r,
            Shape::MultiJumpExp { r, jumps } => {
                let last = jumps.last().map_or(0.0, |j| j.lag);
                f64::max(20.0 / r, 2.0 * last)
            }
            Shape::PowerExp { r, p, .. } => powf(20.0 / r, 1.0 / p),
            Shape::Step { range, .. } | Shape::Nather { range } => 2.0 * range,
            Shape::TruncatedOu { r, cutoff } => f64::min(20.0 / r, 2.0 * cutoff),
            Shape::WhiteNoise => 1.0,
            Shape::Variogram { model, tau2, r } => match model {
                VariogramModel::Linear => 2.0 * (tau2 + self.sigma2) / self.sigma2,
                VariogramModel::Spherical => 2.0 * r,
                VariogramModel::Exponential => 20.0 / r,
            },
        }
    }

    /// Short human-readable description, e.g. `ou(sigma2=1, r=0.5)`.
    pub fn describe(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        let _ = write!(s, "{}(sigma2={}", self.family(), self.sigma2);
        let _ = match &self.shape {
            Shape::Ou { r } => write!(s, ", r={r}"),
            Shape::NuggetOu { r, c } => write!(s, ", r={r}, c={c}"),
            Shape::MultiJumpExp { r, jumps } => {
                let _ = write!(s, ", r={r}, jumps=[");
                for (i, j) in jumps.iter().enumerate() {
                    let sep = if i == 0 { "" } else { ", " };
                    let _ = write!(s, "{sep}({}, {})", j.lag, j.height);
                }
                write!(s, "]")
            }
            Shape::PowerExp { r, c, p } => write!(s, ", r={r}, c={c}, p={p}"),
            Shape::Step { c, range } => write!(s, ", c={c}, range={range}"),
            Shape::Nather { range } => write!(s, ", range={range}"),
            Shape::TruncatedOu { r, cutoff } => write!(s, ", r={r}, cutoff={cutoff}"),
            Shape::WhiteNoise => Ok(()),
            Shape::Variogram { tau2, r, .. } => write!(s, ", tau2={tau2}, r={r}"),
        };
        s.push(')');
        s
    }
}

impl Covariance for Kernel {
    fn eval(&self, d: f64) -> f64 {
        let d = d.abs();
        let s2 = self.sigma2;
        match &self.shape {
            Shape::Ou { r } => s2 * exp(-r * d),
            Shape::NuggetOu { r, c } => {
                if d == 0.0 {
                    s2
                } else {
                    c * s2 * exp(-r * d)
                }
            }
            Shape::MultiJumpExp { r, jumps } => {
                if d == 0.0 {
                    return s2;
                }
                let height = jumps
                    .iter()
                    .take_while(|j| j.lag <= d)
                    .last()
                    .map_or(1.0, |j| j.height);
                height * s2 * exp(-r * d)
            }
            Shape::PowerExp { r, c, p } => {
                if d == 0.0 {
                    s2
                } else {
                    c * s2 * exp(-r * powf(d, *p))
                }
            }
            Shape::Step { c, range } => {
                if d == 0.0 {
                    s2
                } else if d <= *range {
                    c * s2
                } else {
                    0.0
                }
            }
            Shape::Nather { range } => {
                if d < *range {
                    s2 * (1.0 - d / range)
                } else {
                    0.0
                }
            }
            Shape::TruncatedOu { r, cutoff } => {
                if d < *cutoff {
                    s2 * exp(-r * d)
                } else {
                    0.0
                }
            }
            Shape::WhiteNoise => {
                if d == 0.0 {
                    s2
                } else {
                    0.0
                }
            }
            Shape::Variogram { tau2, .. } => {
                let sill = tau2 + s2;
                // eval_variogram cannot fail here: the shape is a variogram.
                let gamma = self.eval_variogram(d).unwrap_or(0.0);
                f64::max(sill - gamma, 0.0)
            }
        }
    }

    fn variance(&self) -> f64 {
        match &self.shape {
            Shape::Variogram { tau2, .. } => tau2 + self.sigma2,
            _ => self.sigma2,
        }
    }

    fn discontinuities(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Ou { .. } | Shape::Nather { .. } => Vec::new(),
            Shape::NuggetOu { c, .. } => {
                if *c < 1.0 {
                    alloc::vec![0.0]
                } else {
                    Vec::new()
                }
            }
            Shape::PowerExp { c, .. } => {
                if *c < 1.0 {
                    alloc::vec![0.0]
                } else {
                    Vec::new()
                }
            }
            Shape::MultiJumpExp { jumps, .. } => {
                let mut lags: Vec<f64> = jumps.iter().map(|j| j.lag).collect();
                if lags.first().is_some_and(|&l| l > 0.0) {
                    lags.insert(0, 0.0);
                }
                lags
            }
            Shape::Step { c, range } => {
                let mut lags = Vec::new();
                if *c < 1.0 {
                    lags.push(0.0);
                }
                lags.push(*range);
                lags
            }
            Shape::TruncatedOu { cutoff, .. } => alloc::vec![*cutoff],
            Shape::WhiteNoise => alloc::vec![0.0],
            Shape::Variogram { tau2, .. } => {
                if *tau2 > 0.0 {
                    alloc::vec![0.0]
                } else {
                    Vec::new()
                }
            }
        }
    }
}

impl<K: Covariance + ?Sized> Covariance for &K {
    fn eval(&self, d: f64) -> f64 {
        (**self).eval(d)
    }
    fn variance(&self) -> f64 {
        (**self).variance()
    }
    fn discontinuities(&self) -> Vec<f64> {
        (**self).discontinuities()
    }
}

/// Positive combination `α C₁ + β C₂`.
#[derive(Debug, Clone)]
pub struct Mixture<A, B> {
    pub first: A,
    pub alpha: f64,
    pub second: B,
    pub beta: f64,
}

impl<A: Covariance, B: Covariance> Covariance for Mixture<A, B> {
    fn eval(&self, d: f64) -> f64 {
        self.alpha * self.first.eval(d) + self.beta * self.second.eval(d)
    }
    fn variance(&self) -> f64 {
        self.alpha * self.first.variance() + self.beta * self.second.variance()
    }
    fn discontinuities(&self) -> Vec<f64> {
        let mut lags = self.first.discontinuities();
        lags.extend(self.second.discontinuities());
        lags.sort_by(f64::total_cmp);
        lags.dedup();
        lags
    }
}

/// Natural power `C^k`.
#[derive(Debug, Clone)]
pub struct Power<K> {
    pub base: K,
    pub exponent: u32,
}

impl<K: Covariance> Covariance for Power<K> {
    fn eval(&self, d: f64) -> f64 {
        let mut v = 1.0;
        let c = self.base.eval(d);
        for _ in 0..self.exponent {
            v *= c;
        }
        v
    }
    fn variance(&self) -> f64 {
        let mut v = 1.0;
        for _ in 0..self.exponent {
            v *= self.base.variance();
        }
        v
    }
    fn discontinuities(&self) -> Vec<f64> {
        self.base.discontinuities()
    }
}

/// Outcome of [`validate_abc`]. Violation lists hold the offending grid
/// points (for convexity, the middle point of the triple).
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `None` when the grid satisfied its preconditions.
    pub grid_problem: Option<String>,
    pub variance: f64,
    pub value_at_zero: f64,
    pub negative: Vec<f64>,
    pub non_monotone: Vec<f64>,
    pub non_convex: Vec<f64>,
    pub d_max: f64,
    pub tail_value: f64,
    pub tol: f64,
}

impl ValidationReport {
    /// (a): `C(0) = σ²` and `C >= 0` on the grid.
    pub fn normalized_nonnegative(&self) -> bool {
        self.grid_problem.is_none()
            && (self.value_at_zero - self.variance).abs() <= self.tol * self.variance.max(1.0)
            && self.negative.is_empty()
    }

    /// (b): nonincreasing, convex away from declared jumps.
    pub fn monotone_convex(&self) -> bool {
        self.grid_problem.is_none() && self.non_monotone.is_empty() && self.non_convex.is_empty()
    }

    /// (c): `C(D_max) < tol`.
    pub fn vanishing(&self) -> bool {
        self.grid_problem.is_none() && self.tail_value < self.tol
    }

    pub fn passed(&self) -> bool {
        self.normalized_nonnegative() && self.monotone_convex() && self.vanishing()
    }
}

/// `count` evenly spaced points from 0 to `d_max` inclusive.
pub fn uniform_grid(d_max: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    let last = (count - 1) as f64;
    (0..count).map(|i| i as f64 * d_max / last).collect()
}

/// Checks the abc conditions on `grid`. The grid must be strictly
/// increasing and start at 0; its last point serves as `D_max`.
///
/// Convexity is tested on consecutive triples through the scaled second
/// divided difference and skipped on triples whose span contains a declared
/// discontinuity.
pub fn validate_abc<K: Covariance + ?Sized>(kernel: &K, grid: &[f64], tol: f64) -> ValidationReport {
    let variance = kernel.variance();
    let mut report = ValidationReport {
        grid_problem: None,
        variance,
        value_at_zero: kernel.eval(0.0),
        negative: Vec::new(),
        non_monotone: Vec::new(),
        non_convex: Vec::new(),
        d_max: grid.last().copied().unwrap_or(0.0),
        tail_value: f64::INFINITY,
        tol,
    };
    if grid.len() < 3 {
        report.grid_problem = Some("grid needs at least three points".into());
        return report;
    }
    if grid[0] != 0.0 {
        report.grid_problem = Some("grid must start at 0".into());
        return report;
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        report.grid_problem = Some("grid must be strictly increasing".into());
        return report;
    }

    let values: Vec<f64> = grid.iter().map(|&d| kernel.eval(d)).collect();
    report.tail_value = values[values.len() - 1];
    let jumps = kernel.discontinuities();

    for (&d, &v) in grid.iter().zip(&values) {
        if v < -tol {
            report.negative.push(d);
        }
    }
    for i in 1..grid.len() {
        if values[i] > values[i - 1] + tol {
            report.non_monotone.push(grid[i]);
        }
    }
    for i in 1..grid.len() - 1 {
        let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
        if jumps.iter().any(|&j| x0 <= j && j <= x2) {
            continue;
        }
        let s1 = (values[i] - values[i - 1]) / (x1 - x0);
        let s2 = (values[i + 1] - values[i]) / (x2 - x1);
        if (s2 - s1) * 0.5 * (x2 - x0) < -tol {
            report.non_convex.push(x1);
        }
    }
    report
}

/// `ψ(d) = -log(C(d) / σ²)`, `+inf` where the kernel vanishes.
#[derive(Debug, Clone, Copy)]
pub struct PsiRepresentation<'a, K: ?Sized> {
    kernel: &'a K,
    variance: f64,
}

impl<K: Covariance + ?Sized> PsiRepresentation<'_, K> {
    pub fn psi(&self, d: f64) -> f64 {
        let c = self.kernel.eval(d);
        if c <= 0.0 {
            f64::INFINITY
        } else {
            -ln(c / self.variance)
        }
    }

    /// `σ² exp(-ψ(d))`, which reproduces `C(d)`.
    pub fn reconstruct(&self, d: f64) -> f64 {
        let psi = self.psi(d);
        if psi.is_infinite() {
            0.0
        } else {
            self.variance * exp(-psi)
        }
    }
}

pub fn psi_of<K: Covariance + ?Sized>(kernel: &K) -> PsiRepresentation<'_, K> {
    PsiRepresentation {
        kernel,
        variance: kernel.variance(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eval_examples() {
        let ou = Kernel::ou(1.0, 1.0).unwrap();
        assert_eq!(ou.eval(0.0), 1.0);

        let nug = Kernel::nugget_ou(1.0, 0.1, 0.9).unwrap();
        assert!(close(nug.eval(1.0), 0.9 * libm::exp(-0.1), 1e-15));
        assert!(close(nug.eval(1.0), 0.81435, 1e-5));

        let sev = Kernel::several_jumps(0.01).unwrap();
        assert!(close(sev.eval(30.0), 0.7 * libm::exp(-0.3), 1e-15));
        assert!(close(sev.eval(30.0), 0.518573, 1e-6));
    }

    #[test]
    fn zero_lag_ignores_jumps() {
        for k in [
            Kernel::several_jumps(0.5).unwrap(),
            Kernel::nugget_ou(2.0, 1.0, 0.3).unwrap(),
            Kernel::step(3.0, 0.5, 2.0).unwrap(),
            Kernel::power_exp(1.5, 1.0, 0.2, 0.5).unwrap(),
        ] {
            assert_eq!(k.eval(0.0), k.sigma2());
        }
    }

    #[test]
    fn jump_bands_are_half_open() {
        let k = Kernel::several_jumps(0.01).unwrap();
        let e = |d: f64| libm::exp(-0.01 * d);
        assert!(close(k.eval(29.999), 0.8 * e(29.999), 1e-15));
        assert!(close(k.eval(73.0), 0.6 * e(73.0), 1e-15));
        assert!(close(k.eval(87.0), 0.6 * e(87.0), 1e-15));
        assert!(close(k.eval(88.0), 0.5 * e(88.0), 1e-15));
        assert!(close(k.eval(0.5), 0.8 * e(0.5), 1e-15));

        // Below the first lag the height is 1.
        let k = Kernel::multi_jump(1.0, 0.1, vec![Jump::new(1.0, 0.9)]).unwrap();
        assert!(close(k.eval(0.5), libm::exp(-0.05), 1e-15));
        assert!(close(k.eval(1.0), 0.9 * libm::exp(-0.1), 1e-15));
    }

    #[test]
    fn step_kernel_closed_at_range() {
        let k = Kernel::step(1.0, 0.5, 2.0).unwrap();
        assert_eq!(k.eval(2.0), 0.5);
        assert_eq!(k.eval(2.0 + 1e-12), 0.0);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(Kernel::ou(1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(Kernel::ou(1.0, -1.0).is_err());
        assert!(Kernel::ou(0.0, 1.0).is_err());
        assert!(Kernel::nugget_ou(1.0, 1.0, 0.0).is_err());
        assert!(Kernel::nugget_ou(1.0, 1.0, 1.5).is_err());
        assert!(Kernel::power_exp(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(Kernel::power_exp(1.0, 1.0, 1.0, -2.0).is_err());
        let bad = Kernel::multi_jump(1.0, 0.1, vec![Jump::new(1.0, 0.5), Jump::new(2.0, 0.8)]);
        assert!(matches!(bad, Err(Error::InvalidParameter(_))));
        let bad = Kernel::multi_jump(1.0, 0.1, vec![Jump::new(2.0, 0.8), Jump::new(2.0, 0.5)]);
        assert!(bad.is_err());
        assert!(Kernel::multi_jump(1.0, 0.1, vec![]).is_err());
        assert!(Kernel::variogram(VariogramModel::Spherical, 1.0, 0.0, 0.0).is_err());
        assert!(Kernel::variogram(VariogramModel::Exponential, 1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn variogram_examples() {
        let lin = Kernel::variogram(VariogramModel::Linear, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(lin.eval_variogram(0.0).unwrap(), 0.0);
        assert_eq!(lin.eval_variogram(0.5).unwrap(), 0.5);

        let sph = Kernel::variogram(VariogramModel::Spherical, 1.0, 0.0, 2.0).unwrap();
        assert!(close(sph.eval_variogram(2.0).unwrap(), 1.0, 1e-15));
        assert_eq!(sph.eval_variogram(5.0).unwrap(), 1.0);

        let ex = Kernel::variogram(VariogramModel::Exponential, 1.0, 0.5, 1.0).unwrap();
        assert!(close(ex.eval_variogram(1e3).unwrap(), 1.5, 1e-15));
        assert!(close(ex.eval_variogram(1e-9).unwrap(), 0.5, 1e-8));

        // Nugget shows up as a jump of the covariance at the origin.
        assert_eq!(ex.eval(0.0), 1.5);
        assert!(close(ex.eval(1e-9), 1.0, 1e-8));

        assert!(Kernel::ou(1.0, 1.0).unwrap().eval_variogram(1.0).is_err());
    }

    #[test]
    fn linear_variogram_covariance_is_nather_triangle() {
        let lin = Kernel::variogram(VariogramModel::Linear, 1.0 / 3.0, 0.0, 1.0).unwrap();
        let nat = Kernel::nather(1.0 / 3.0, 1.0).unwrap();
        for d in [0.0, 0.25, 0.5, 0.99, 1.0, 2.0] {
            assert!(close(lin.eval(d), nat.eval(d), 1e-15), "d={d}");
        }
    }

    #[test]
    fn validate_ou_passes() {
        let k = Kernel::ou(1.0, 1.0).unwrap();
        let grid = uniform_grid(20.0, 201);
        let rep = validate_abc(&k, &grid, 1e-6);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn validate_step_passes_all_three() {
        let k = Kernel::step(1.0, 0.5, 2.0).unwrap();
        let grid = uniform_grid(4.0, 41);
        let rep = validate_abc(&k, &grid, 1e-9);
        assert!(rep.normalized_nonnegative());
        assert!(rep.monotone_convex(), "{rep:?}");
        assert!(rep.vanishing());
    }

    #[test]
    fn validate_flags_gaussian_as_non_convex() {
        let k = Kernel::power_exp(1.0, 1.0, 1.0, 2.0).unwrap();
        let rep = validate_abc(&k, &uniform_grid(10.0, 201), 1e-9);
        assert!(rep.normalized_nonnegative());
        assert!(rep.non_monotone.is_empty());
        assert!(!rep.non_convex.is_empty());
        assert!(!rep.passed());
    }

    #[test]
    fn validate_flags_short_grid_tail() {
        let k = Kernel::ou(1.0, 0.01).unwrap();
        let rep = validate_abc(&k, &uniform_grid(10.0, 11), 1e-6);
        assert!(!rep.vanishing());
        assert!(rep.monotone_convex());
    }

    #[test]
    fn validate_rejects_bad_grids() {
        let k = Kernel::ou(1.0, 1.0).unwrap();
        assert!(validate_abc(&k, &[0.0, 1.0], 1e-6).grid_problem.is_some());
        assert!(validate_abc(&k, &[0.5, 1.0, 2.0], 1e-6).grid_problem.is_some());
        assert!(validate_abc(&k, &[0.0, 1.0, 1.0, 2.0], 1e-6).grid_problem.is_some());
        assert!(!validate_abc(&k, &[0.0, 2.0, 1.0], 1e-6).passed());
    }

    #[test]
    fn default_dmax_makes_tail_small() {
        for k in [
            Kernel::ou(1.0, 0.3).unwrap(),
            Kernel::several_jumps(0.01).unwrap(),
            Kernel::power_exp(1.0, 2.0, 1.0, 0.5).unwrap(),
            Kernel::step(1.0, 0.4, 3.0).unwrap(),
            Kernel::nather(1.0, 3.0).unwrap(),
            Kernel::variogram(VariogramModel::Spherical, 1.0, 0.2, 2.0).unwrap(),
            Kernel::variogram(VariogramModel::Exponential, 1.0, 0.2, 2.0).unwrap(),
            Kernel::variogram(VariogramModel::Linear, 0.5, 0.2, 1.0).unwrap(),
        ] {
            let dmax = k.default_dmax();
            assert!(k.eval(dmax) < 1e-8, "{}", k.describe());
        }
    }

    #[test]
    fn closure_under_combination_and_powers() {
        let a = Kernel::ou(1.0, 0.7).unwrap();
        let b = Kernel::nugget_ou(1.0, 1.5, 0.6).unwrap();
        let grid = uniform_grid(40.0, 801);
        let mix = Mixture {
            first: &a,
            alpha: 0.3,
            second: &b,
            beta: 2.0,
        };
        assert!(validate_abc(&mix, &grid, 1e-8).passed());
        for k in 1..=3 {
            let pw = Power {
                base: &b,
                exponent: k,
            };
            assert!(validate_abc(&pw, &grid, 1e-8).passed(), "power {k}");
        }
    }

    #[test]
    fn psi_examples() {
        let r = 0.37;
        let ou = Kernel::ou(1.0, r).unwrap();
        let psi = psi_of(&ou);
        for d in [0.0, 0.1, 1.0, 7.5, 30.0] {
            assert!(close(psi.psi(d), r * d, 1e-12 * (1.0 + r * d)));
        }
        let c = 0.6;
        let nug = Kernel::nugget_ou(1.0, r, c).unwrap();
        let psi = psi_of(&nug);
        assert_eq!(psi.psi(0.0), 0.0);
        for d in [0.1, 1.0, 7.5] {
            assert!(close(psi.psi(d), r * d - libm::log(c), 1e-12));
        }
        let step = Kernel::step(2.0, 0.5, 1.0).unwrap();
        assert_eq!(psi_of(&step).psi(1.5), f64::INFINITY);
        assert_eq!(psi_of(&step).reconstruct(1.5), 0.0);
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(Family::from_name(f.name()), Some(f));
        }
        assert_eq!(Family::from_name("matern"), None);
    }

    #[test]
    fn with_range_parameter_keeps_other_fields() {
        let k = Kernel::nugget_ou(2.0, 0.5, 0.4).unwrap();
        let k2 = k.with_range_parameter(0.8).unwrap();
        assert_eq!(k2, Kernel::nugget_ou(2.0, 0.8, 0.4).unwrap());
        assert!(Kernel::white_noise(1.0).unwrap().with_range_parameter(1.0).is_err());
    }

    #[test]
    fn analytic_range_derivative_matches_central_difference() {
        let kernels = [
            Kernel::ou(1.3, 0.8).unwrap(),
            Kernel::nugget_ou(1.0, 0.8, 0.5).unwrap(),
            Kernel::several_jumps(0.05).unwrap(),
            Kernel::power_exp(1.0, 0.8, 0.9, 0.6).unwrap(),
            Kernel::variogram(VariogramModel::Spherical, 1.0, 0.1, 2.5).unwrap(),
            Kernel::variogram(VariogramModel::Exponential, 1.0, 0.1, 2.5).unwrap(),
        ];
        for k in &kernels {
            let r = k.range_parameter().unwrap();
            let h = 1e-6 * r;
            let up = k.with_range_parameter(r + h).unwrap();
            let dn = k.with_range_parameter(r - h).unwrap();
            for d in [0.0, 0.3, 1.0, 2.2, 40.0] {
                let fd = (up.eval(d) - dn.eval(d)) / (2.0 * h);
                let an = k.d_range(d).unwrap();
                assert!(close(fd, an, 1e-6), "{} d={d}: {fd} vs {an}", k.describe());
            }
        }
    }
}
