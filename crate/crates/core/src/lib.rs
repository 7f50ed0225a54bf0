//! Concentration machinery for sub-Weibull random variables and vectors.
//!
//! The crate is organised around the Generalized Bernstein-Orlicz (GBO)
//! quasi-norm `Ψ_{α,L}` whose inverse is `√log(1+t) + L(log(1+t))^{1/α}`:
//!
//! - [`orlicz`]: Orlicz-type functions, their inverses, plug-in empirical norms
//!   and the closed-form constants that relate them.
//! - [`tailbounds`]: finite-sample bound formulas for weighted sums, sums with
//!   variance-driven Gaussian parts and maxima of averages.
//! - [`samplers`]: seed-reproducible generators for sub-Weibull scalars,
//!   vectors and regression data.
//! - [`covariance`]: gram/covariance estimators, max-norm errors, sparse
//!   sub-matrix operator norms (exact and quarter-net) and restricted
//!   eigenvalue verification.
//! - [`lasso`]: coordinate-descent Lasso with KKT certification and the
//!   theory-driven regularisation and error formulas.
//! - [`hdclt`]: max statistics, Gaussian analogues, the multiplier bootstrap
//!   and high-dimensional Berry-Esseen bound evaluation.

#![forbid(unsafe_code)]

pub mod covariance;
pub mod error;
pub mod hdclt;
pub mod lasso;
pub mod linalg;
pub mod orlicz;
pub mod samplers;
pub mod stats;
pub mod tailbounds;

pub use error::{Error, Result};
