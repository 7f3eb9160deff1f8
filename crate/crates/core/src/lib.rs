//! Semicontinuous covariance kernels and the numerics built on top of them.
//!
//! The crate is `no_std` with `alloc`. Enable the `parallel` feature to fan
//! replicated Monte-Carlo work out over a rayon pool; results do not depend on
//! the worker count because every replicate draws from its own RNG stream.
//!
//! Module map:
//!
//! - [`kernels`]: the covariance catalog, the abc validator and the
//!   `ψ` representation `C(d) = σ² exp(-ψ(d))`.
//! - [`matalg`]: designs, covariance matrices, Cholesky, extreme eigenvalues
//!   and the closed-form inverse of OU Toeplitz matrices.
//! - [`fisher`]: Fisher information for the trend and range parameters.
//! - [`design`]: grid search for optimal designs.
//! - [`simulate`]: correlated increments and random walks.
//! - [`acftest`]: empirical ACF and the sum-of-residuals statistic.
//! - [`forecast`]: conditional Cholesky forecasting.
//! - [`ruin`]: surplus processes and ruin probabilities.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod acftest;
pub mod design;
mod error;
pub mod fisher;
pub mod forecast;
pub mod kernels;
pub mod matalg;
mod math;
mod par;
pub mod rng;
pub mod ruin;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use kernels::{Covariance, Family, Jump, Kernel, Shape, VariogramModel};
pub use matalg::{CovMatrix, Design, Interval, Matrix};
