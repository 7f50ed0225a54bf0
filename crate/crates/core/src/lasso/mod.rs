//! ℓ₁-penalized least squares and its theory-driven tuning and error bounds.

mod bounds;
mod solver;

pub use bounds::{
    cone_membership, deterministic_error_bound, error_bound_subweibull, lambda_theory_poly,
    lambda_theory_subweibull, oracle_inequality_bound, LambdaPolicy, ORACLE_GAMMA_FACTOR,
};
pub use solver::{kkt_residual, objective, soft_threshold, solve, LassoFit, LassoProblem};
