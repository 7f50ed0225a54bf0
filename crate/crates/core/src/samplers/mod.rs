//! Seed-reproducible generators for scalars, vectors and regression data.

mod dump;
mod regression;
mod rng;
mod scalar;
mod vector;

pub use dump::{read_dump, sidecar_path, write_dump};
pub use regression::{make_regression, population_beta0, Misspecification, Regression, ResponseMap};
pub use rng::RngStream;
pub use scalar::{draw_many, draw_scalar, symmetric_weibull_from_uniform, ScalarLaw};
pub use vector::{draw_matrix, DataMatrix, VectorLaw};
