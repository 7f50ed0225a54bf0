use std::f64::consts::SQRT_2;

use nalgebra::DVector;

use super::LassoProblem;
use crate::error::{ensure, ensure_finite_nonneg, Error, Result};
use crate::orlicz::BoundConstants;

/// `Γ(S) = λ_min − ORACLE_GAMMA_FACTOR·ξ(|S|)` in the oracle inequality.
pub const ORACLE_GAMMA_FACTOR: f64 = 1755.0;

/// How the regularization level is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaPolicy {
    Fixed(f64),
    TheorySubWeibull { sigma_np: f64, k_np: f64, gamma: f64, constants: BoundConstants },
    TheoryPoly { sigma_np: f64, k_np: f64, k_eps_r: f64, alpha: f64, r: f64, l: f64, constants: BoundConstants },
    /// `2‖Xᵀε/n‖_∞` with the true noise; simulation only.
    EmpiricalOracle(DVector<f64>),
}

impl LambdaPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            LambdaPolicy::Fixed(_) => "fixed",
            LambdaPolicy::TheorySubWeibull { .. } => "theory_subweibull",
            LambdaPolicy::TheoryPoly { .. } => "theory_poly",
            LambdaPolicy::EmpiricalOracle(_) => "empirical_oracle",
        }
    }

    pub fn resolve(&self, problem: &LassoProblem) -> Result<f64> {
        let (n, p) = (problem.n(), problem.p());
        match self {
            LambdaPolicy::Fixed(l) => {
                ensure(l.is_finite() && *l > 0.0, || format!("lambda must be positive, got {l}"))?;
                Ok(*l)
            }
            LambdaPolicy::TheorySubWeibull { sigma_np, k_np, gamma, constants } => {
                lambda_theory_subweibull(*sigma_np, *k_np, n, p, *gamma, constants)
            }
            LambdaPolicy::TheoryPoly { sigma_np, k_np, k_eps_r, alpha, r, l, constants } => {
                lambda_theory_poly(*sigma_np, *k_np, *k_eps_r, n, p, *alpha, *r, *l, constants)
            }
            LambdaPolicy::EmpiricalOracle(eps) => {
                if eps.len() != n {
                    return Err(Error::Dimension(format!("noise has length {}, X has {n} rows", eps.len())));
                }
                let l = 2.0 * problem.correlations(eps).amax();
                ensure(l > 0.0, || "oracle lambda is zero".into())?;
                Ok(l)
            }
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure(v.is_finite() && v > 0.0, || format!("{name} must be positive, got {v}"))
}

/// Sub-Weibull regularization level; `gamma` is the tail order of `X(j)ε`.
pub fn lambda_theory_subweibull(
    sigma_np: f64,
    k_np: f64,
    n: usize,
    p: usize,
    gamma: f64,
    constants: &BoundConstants,
) -> Result<f64> {
    ensure_finite_nonneg("sigma_np", sigma_np)?;
    ensure_finite_nonneg("K_np", k_np)?;
    positive("gamma", gamma)?;
    ensure(n >= 2 && p >= 1, || format!("need n >= 2 and p >= 1, got n={n}, p={p}"))?;
    let nf = n as f64;
    let lnp = (nf * p as f64).ln();
    let lambda = 14.0 * SQRT_2 * sigma_np * (lnp / nf).sqrt()
        + constants.c_gamma_lasso * k_np * k_np * (2.0 * nf).ln().powf(1.0 / gamma) * (2.0 * lnp).powf(1.0 / gamma) / nf;
    ensure(lambda > 0.0, || "theory lambda is zero; sigma_np or K_np must be positive".into())?;
    Ok(lambda)
}

/// Regularization level for noise with only `r` finite moments.
#[allow(clippy::too_many_arguments)]
pub fn lambda_theory_poly(
    sigma_np: f64,
    k_np: f64,
    k_eps_r: f64,
    n: usize,
    p: usize,
    alpha: f64,
    r: f64,
    l: f64,
    constants: &BoundConstants,
) -> Result<f64> {
    ensure_finite_nonneg("sigma_np", sigma_np)?;
    ensure_finite_nonneg("K_np", k_np)?;
    ensure_finite_nonneg("K_eps_r", k_eps_r)?;
    positive("alpha", alpha)?;
    ensure(r >= 2.0, || format!("r must be >= 2, got {r}"))?;
    ensure(l.is_finite() && l >= 1.0, || format!("L must be >= 1, got {l}"))?;
    ensure(n >= 2 && p >= 1, || format!("need n >= 2 and p >= 1, got n={n}, p={p}"))?;
    let nf = n as f64;
    let lnp = (nf * p as f64).ln();
    let first = 14.0 * SQRT_2 * sigma_np * (lnp / nf).sqrt();
    let second = constants.c_alpha_poly * k_np * k_eps_r * lnp.powf(1.0 / alpha)
        * ((2.0 * nf).ln().powf(1.0 / alpha) + l)
        / nf.powf(1.0 - 1.0 / r);
    let lambda = first + second;
    ensure(lambda > 0.0, || "theory lambda is zero".into())?;
    Ok(lambda)
}

/// ℓ₂ error bound for the Lasso under the sub-Weibull tuning.
#[allow(clippy::too_many_arguments)]
pub fn error_bound_subweibull(
    sigma_np: f64,
    k_np: f64,
    n: usize,
    p: usize,
    k: usize,
    gamma: f64,
    lambda_min: f64,
    constants: &BoundConstants,
) -> Result<f64> {
    ensure_finite_nonneg("sigma_np", sigma_np)?;
    ensure_finite_nonneg("K_np", k_np)?;
    positive("gamma", gamma)?;
    positive("lambda_min", lambda_min)?;
    ensure(n >= 1 && p >= 1 && k >= 1, || "n, p and k must be >= 1".into())?;
    let (nf, kf) = (n as f64, k as f64);
    let lnp = (nf * p as f64).ln();
    let inner = sigma_np * (kf * lnp / nf).sqrt()
        + constants.c_gamma_lasso * k_np * k_np * kf.sqrt() * lnp.powf(2.0 / gamma) / nf;
    Ok(84.0 * SQRT_2 / lambda_min * inner)
}

/// `3√k·λ/γ`, valid whenever `λ ≥ 2‖Xᵀε/n‖_∞` and RE holds with `γ`.
pub fn deterministic_error_bound(k: usize, lambda: f64, gamma: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    ensure_finite_nonneg("lambda", lambda)?;
    Ok(3.0 * (k as f64).sqrt() * lambda / gamma)
}

fn l1_outside(beta0: &DVector<f64>, s: &[usize]) -> f64 {
    let mut inside = vec![false; beta0.len()];
    for &j in s {
        if j < inside.len() {
            inside[j] = true;
        }
    }
    beta0.iter().zip(&inside).filter(|(_, &i)| !i).map(|(b, _)| b.abs()).sum()
}

/// Minimize the oracle inequality over candidate supports.
///
/// Candidates with `Γ(S) ≤ 0` are skipped. Ties go to the smaller support,
/// then the lexicographically smaller one.
pub fn oracle_inequality_bound(
    candidates: &[Vec<usize>],
    lambda: f64,
    xi_of_size: impl Fn(usize) -> f64,
    lambda_min: f64,
    beta0: &DVector<f64>,
) -> Result<(f64, Vec<usize>)> {
    ensure(!candidates.is_empty(), || "no candidate supports".into())?;
    positive("lambda", lambda)?;
    let mut best: Option<(f64, &Vec<usize>)> = None;
    for s in candidates {
        ensure(!s.is_empty(), || "candidate supports must be nonempty".into())?;
        let size = s.len() as f64;
        let xi = xi_of_size(s.len());
        let gamma = lambda_min - ORACLE_GAMMA_FACTOR * xi;
        if !(gamma > 0.0) {
            continue;
        }
        let tail = l1_outside(beta0, s);
        let value = 18.0 * lambda * lambda * size / (gamma * gamma)
            + 8.0 * lambda * tail / gamma
            + 3456.0 * xi * tail * tail / (size * gamma);
        let better = match best {
            None => true,
            Some((bv, bs)) => value < bv || (value == bv && (s.len(), s) < (bs.len(), bs)),
        };
        if better {
            best = Some((value, s));
        }
    }
    best.map(|(v, s)| (v, s.clone()))
        .ok_or_else(|| Error::Argument("every candidate has a nonpositive curvature margin".into()))
}

/// `‖ν(Sᶜ)‖₁ ≤ 3‖ν(S)‖₁ + 4‖β₀(Sᶜ)‖₁`.
pub fn cone_membership(nu: &DVector<f64>, s: &[usize], beta0: &DVector<f64>) -> bool {
    let total: f64 = nu.iter().map(|v| v.abs()).sum();
    let outside = l1_outside(nu, s);
    let inside = total - outside;
    outside <= 3.0 * inside + 4.0 * l1_outside(beta0, s) + 1e-12 * total
}
