//! Finite-sample deviation bounds for sums and maxima of sub-Weibull variables.

use std::f64::consts::E;

use crate::error::{ensure, ensure_finite_nonneg, Error, Result};
use crate::orlicz::constants::{c_weighted_sum, k_alpha};
use crate::orlicz::{BoundConstants, TailPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumBoundSource {
    WeightedSum,
    VarianceSmallAlpha,
    VarianceLargeAlpha,
}

/// GBO norm bound `‖Σ X_i‖_{Ψ_{α', L}} ≤ gbo_norm_bound` with `L = l_param`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumBoundReport {
    pub gbo_norm_bound: f64,
    pub l_param: f64,
    pub effective_alpha: f64,
    pub source: SumBoundSource,
    /// The scale driving the bound was zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub t_values: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub prob_bounds: Vec<f64>,
}

impl TailCurve {
    pub fn tabulate(t_values: &[f64], f: impl Fn(f64) -> Result<TailPoint>) -> Result<Self> {
        let points: Vec<TailPoint> = t_values.iter().map(|&t| f(t)).collect::<Result<_>>()?;
        Ok(Self {
            t_values: t_values.to_vec(),
            thresholds: points.iter().map(|p| p.threshold).collect(),
            prob_bounds: points.iter().map(|p| p.prob_bound).collect(),
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("alpha must be positive, got {alpha}")))
    }
}

fn lp_norm(b: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    }
    let m = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * b.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Bound on the GBO norm of `Σ a_i X_i` for independent mean-zero `X_i` with
/// the given `ψ_α` norms.
pub fn weighted_sum_bound(weights: &[f64], psi_norms: &[f64], alpha: f64) -> Result<SumBoundReport> {
    check_alpha(alpha)?;
    if weights.len() != psi_norms.len() {
        return Err(Error::Dimension(format!("{} weights vs {} norms", weights.len(), psi_norms.len())));
    }
    ensure(!weights.is_empty(), || "weighted sum needs at least one term".into())?;
    for &s in psi_norms {
        ensure_finite_nonneg("psi norm", s)?;
    }
    let b: Vec<f64> = weights.iter().zip(psi_norms).map(|(a, s)| a * s).collect();
    let b2 = lp_norm(&b, 2.0);
    let base = SumBoundReport {
        gbo_norm_bound: 0.0,
        l_param: 0.0,
        effective_alpha: alpha,
        source: SumBoundSource::WeightedSum,
        degenerate: true,
    };
    if b2 == 0.0 {
        return Ok(base);
    }
    let c = c_weighted_sum(alpha);
    let lead = 4f64.powf(1.0 / alpha) / (std::f64::consts::SQRT_2 * b2);
    let l_param = if alpha < 1.0 {
        lead * lp_norm(&b, f64::INFINITY)
    } else {
        // Hölder conjugate of α: 1/α + 1/β = 1
        let beta = if alpha == 1.0 { f64::INFINITY } else { alpha / (alpha - 1.0) };
        lead * 4.0 * E * lp_norm(&b, beta) / c
    };
    Ok(SumBoundReport { gbo_norm_bound: 2.0 * E * c * b2, l_param, degenerate: false, ..base })
}

/// Variance-driven GBO bound for sums of independent mean-zero variables.
///
/// For `α ≤ 1` uses `c_alpha_thm32·k_alpha_lt`, for `α > 1` uses
/// `c_alpha_thm33` with effective order 1.
pub fn variance_sum_bound(
    variances: &[f64],
    max_psi_norm: f64,
    alpha: f64,
    constants: &BoundConstants,
) -> Result<SumBoundReport> {
    check_alpha(alpha)?;
    ensure(!variances.is_empty(), || "variance bound needs at least one term".into())?;
    ensure_finite_nonneg("max psi norm", max_psi_norm)?;
    for &v in variances {
        ensure_finite_nonneg("variance", v)?;
    }
    let n = variances.len() as f64;
    let total: f64 = variances.iter().sum();
    let (source, effective_alpha) = if alpha <= 1.0 {
        (SumBoundSource::VarianceSmallAlpha, alpha)
    } else {
        (SumBoundSource::VarianceLargeAlpha, 1.0)
    };
    if total == 0.0 {
        return Ok(SumBoundReport { gbo_norm_bound: 0.0, l_param: 0.0, effective_alpha, source, degenerate: true });
    }
    let root = total.sqrt();
    let six = 6f64.sqrt();
    let l_param = if alpha <= 1.0 {
        4f64.powf(1.0 / alpha) * constants.k_alpha_lt * constants.c_alpha_thm32 / (2.0 * six)
            * (n + 1.0).ln().powf(1.0 / alpha)
            * max_psi_norm
            / root
    } else {
        4.0 * constants.c_alpha_thm33 / (2.0 * six) * (n + 1.0).ln() * max_psi_norm / root
    };
    Ok(SumBoundReport {
        gbo_norm_bound: 2.0 * E * six * root,
        l_param,
        effective_alpha,
        source,
        degenerate: false,
    })
}

/// Deviation threshold for `max_j |n⁻¹ Σ_i X_i(j)|` over `q` coordinates.
pub fn max_average_threshold(
    gamma: f64,
    k: f64,
    n: usize,
    q: usize,
    alpha: f64,
    t: f64,
    constants: &BoundConstants,
) -> Result<TailPoint> {
    check_alpha(alpha)?;
    ensure_finite_nonneg("Gamma", gamma)?;
    ensure_finite_nonneg("K", k)?;
    ensure_finite_nonneg("t", t)?;
    ensure(n >= 1 && q >= 1, || format!("n and q must be >= 1, got n={n}, q={q}"))?;
    let nf = n as f64;
    let s = t + (q as f64).ln();
    let alpha_star = alpha.min(1.0);
    let threshold = 7.0 * (gamma * s / nf).sqrt()
        + constants.c_alpha_thm34 * k * (2.0 * nf).ln().powf(1.0 / alpha) * s.powf(1.0 / alpha_star) / nf;
    Ok(TailPoint { threshold, prob_bound: (3.0 * (-t).exp()).min(1.0) })
}

/// Hölder rule for products: `β = (Σ 1/α_i)⁻¹`, norm bound `Π ‖X_i‖`.
pub fn product_norm(norms: &[f64], alphas: &[f64]) -> Result<(f64, f64)> {
    if norms.len() != alphas.len() {
        return Err(Error::Dimension(format!("{} norms vs {} orders", norms.len(), alphas.len())));
    }
    ensure(!norms.is_empty(), || "product needs at least one factor".into())?;
    for &a in alphas {
        check_alpha(a)?;
    }
    for &s in norms {
        ensure_finite_nonneg("norm", s)?;
    }
    let beta = 1.0 / alphas.iter().map(|a| 1.0 / a).sum::<f64>();
    Ok((beta, norms.iter().product()))
}

/// Inputs of the linear-kernel deviation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelInputs {
    pub m_y: f64,
    pub r_k: f64,
    pub c_y: f64,
    pub c_k: f64,
    pub n: usize,
    pub h: f64,
    pub p_dim: u32,
}

/// Deviation threshold for a sub-Weibull linear kernel average.
pub fn kernel_deviation_threshold(
    inputs: &KernelInputs,
    alpha: f64,
    t: f64,
    constants: &BoundConstants,
) -> Result<TailPoint> {
    check_alpha(alpha)?;
    for (name, v) in [("M_Y", inputs.m_y), ("R_K", inputs.r_k), ("C_Y", inputs.c_y), ("C_K", inputs.c_k), ("t", t)] {
        ensure_finite_nonneg(name, v)?;
    }
    let nf = inputs.n as f64;
    let nh = nf * inputs.h.powi(inputs.p_dim as i32);
    if !(nh > 0.0 && nh.is_finite()) {
        return Err(Error::Argument(format!("n h^p must be positive, got {nh}")));
    }
    let gamma_yk = (inputs.m_y * inputs.r_k).sqrt();
    let upsilon_yk = inputs.c_y * inputs.c_k;
    let threshold = 7.0 * gamma_yk * t.sqrt() / nh.sqrt()
        + constants.c_alpha_thm34 * upsilon_yk * (2.0 * nf).ln().powf(1.0 / alpha) * t.powf(1.0 / alpha.min(1.0)) / nh;
    Ok(TailPoint { threshold, prob_bound: (3.0 * (-t).exp()).min(1.0) })
}

/// Classical two-regime Bernstein tail for sub-exponential sums.
pub fn bernstein_subexp_tail(sigma2: f64, c_n: f64, t: f64) -> Result<f64> {
    ensure_finite_nonneg("sigma2", sigma2)?;
    ensure_finite_nonneg("C_n", c_n)?;
    ensure_finite_nonneg("t", t)?;
    if sigma2 == 0.0 && c_n == 0.0 {
        return Err(Error::Argument("sigma2 and C_n cannot both be zero".into()));
    }
    let gaussian_regime = c_n == 0.0 || t < sigma2 / c_n;
    let exponent = if gaussian_regime { t * t / (4.0 * sigma2) } else { t / (4.0 * c_n) };
    Ok((2.0 * (-exponent).exp()).min(1.0))
}

/// `K(α)` re-exported for callers assembling tail-to-norm conversions.
pub fn tail_to_norm_constant(alpha: f64) -> f64 {
    k_alpha(alpha)
}
