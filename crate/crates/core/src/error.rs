use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A kernel, design or routine argument violates its contract.
    InvalidParameter(String),
    /// Cholesky met a pivot at or below the floor.
    NotPositiveDefinite { pivot: usize, value: f64 },
    /// A linear solve on a PSD but singular covariance matrix.
    SingularMatrix { pivot: usize },
    NonConvergence { iterations: usize },
    Infeasible(String),
    /// Zero sample variance; the ACF is undefined.
    DegenerateSeries,
    DimensionMismatch(String),
    MismatchedConfiguration(String),
}

impl Error {
    /// Stable kebab-case name, used on diagnostic output by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::SingularMatrix { .. } => "singular-matrix",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Infeasible(_) => "infeasible",
            Error::DegenerateSeries => "degenerate-series",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::MismatchedConfiguration(_) => "mismatched-configuration",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid-parameter: {m}"),
            Error::NotPositiveDefinite { pivot, value } => write!(
                f,
                "not-positive-definite: pivot {pivot} is {value:e}, at or below the floor"
            ),
            Error::SingularMatrix { pivot } => {
                write!(f, "singular-matrix: zero pivot at index {pivot}")
            }
            Error::NonConvergence { iterations } => {
                write!(f, "non-convergence: no convergence after {iterations} iterations")
            }
            Error::Infeasible(m) => write!(f, "infeasible: {m}"),
            Error::DegenerateSeries => write!(f, "degenerate-series: sample variance is zero"),
            Error::DimensionMismatch(m) => write!(f, "dimension-mismatch: {m}"),
            Error::MismatchedConfiguration(m) => write!(f, "mismatched-configuration: {m}"),
        }
    }
}

impl core::error::Error for Error {}
