use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::net::QuarterNet;
use crate::error::{ensure, ensure_finite_nonneg, Error, Result};
use crate::linalg;
use crate::samplers::{DataMatrix, RngStream, ScalarLaw};

/// RE holds with `γ = λ_min/2` once `λ_min ≥ RE_FACTOR·Ξ`.
pub const RE_FACTOR: f64 = 1782.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsConvexityParams {
    pub upsilon: f64,
    pub k_np: f64,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub alpha: f64,
    pub c_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReReport {
    pub lambda_min: f64,
    pub xi: f64,
    pub satisfied: bool,
    pub gamma_n: f64,
    pub k: usize,
}

/// Uniform deviation `Ξ` of `θᵀ(Σ̂ − Σ)θ` over sparse directions: the
/// marginal version (`joint = false`) carries an extra factor `k`.
pub fn xi_bound(params: &RsConvexityParams, joint: bool) -> Result<f64> {
    let RsConvexityParams { upsilon, k_np, n, p, k, alpha, c_alpha } = *params;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Argument(format!("alpha must be positive, got {alpha}")));
    }
    if alpha > 2.0 {
        return Err(Error::Unsupported(format!("restricted convexity bounds require alpha <= 2, got {alpha}")));
    }
    ensure_finite_nonneg("Upsilon", upsilon)?;
    ensure_finite_nonneg("K_np", k_np)?;
    ensure(c_alpha.is_finite() && c_alpha > 0.0, || format!("C_alpha must be positive, got {c_alpha}"))?;
    ensure(n >= 1 && k >= 1, || format!("n and k must be >= 1, got n={n}, k={k}"))?;
    ensure(k <= p, || format!("k = {k} exceeds p = {p}"))?;
    let (nf, kf) = (n as f64, k as f64);
    let ratio = 36.0 * nf * p as f64 / kf;
    ensure(ratio > 1.0, || format!("36np/k = {ratio} must exceed 1"))?;
    let ent = kf * ratio.ln();
    let first = 14.0 * std::f64::consts::SQRT_2 * (upsilon * ent / nf).sqrt();
    let extra = if joint { 1.0 } else { kf };
    let second = c_alpha * k_np * k_np * extra * (2.0 * nf).ln().powf(2.0 / alpha) * ent.powf(2.0 / alpha) / nf;
    Ok(first + second)
}

/// Restricted eigenvalue verdict from the smallest eigenvalue of `sigma`.
pub fn re_check(sigma: &DMatrix<f64>, xi: f64, k: usize) -> Result<ReReport> {
    ensure_finite_nonneg("xi", xi)?;
    let lambda_min = linalg::min_eigenvalue(sigma)?;
    let satisfied = lambda_min >= RE_FACTOR * xi;
    Ok(ReReport { lambda_min, xi, satisfied, gamma_n: if satisfied { lambda_min / 2.0 } else { 0.0 }, k })
}

/// `(λ_min − 27ξ)‖θ‖₂² − (54ξ/k)‖θ‖₁²`.
pub fn rsc_lower(theta: &[f64], lambda_min: f64, xi: f64, k: usize) -> Result<f64> {
    ensure(k >= 1, || "k must be >= 1".into())?;
    let l2: f64 = theta.iter().map(|x| x * x).sum();
    let l1: f64 = theta.iter().map(|x| x.abs()).sum();
    Ok((lambda_min - 27.0 * xi) * l2 - 54.0 * xi / k as f64 * l1 * l1)
}

/// Net lower approximation of `Υ_{n,k}`: the largest empirical variance of
/// `(X_iᵀθ)²` over the net.
pub fn upsilon_estimate(x: &DataMatrix, net: &QuarterNet) -> Result<f64> {
    ensure(!net.is_empty(), || "net is empty".into())?;
    if net.p != x.p() {
        return Err(Error::Dimension(format!("net has p = {}, data has p = {}", net.p, x.p())));
    }
    let n = x.n();
    let mut best = 0.0f64;
    let mut z = vec![0.0; n];
    for s in &net.supports {
        let cols: Vec<&[f64]> = s.iter().map(|&j| x.column(j)).collect();
        for v in &net.sphere {
            z.iter_mut().for_each(|a| *a = 0.0);
            for (c, w) in cols.iter().zip(v) {
                for (a, b) in z.iter_mut().zip(c.iter()) {
                    *a += w * b;
                }
            }
            let (mut m1, mut m2) = (0.0, 0.0);
            for a in &z {
                let sq = a * a;
                m1 += sq;
                m2 += sq * sq;
            }
            m1 /= n as f64;
            m2 /= n as f64;
            best = best.max(m2 - m1 * m1);
        }
    }
    Ok(best.max(0.0))
}

/// `sup_{‖θ‖₀ ≤ k, ‖θ‖₂ = 1} Var((Xᵀθ)²)` for iid mean-zero coordinates.
///
/// With `s = Σθ_j⁴ ∈ [1/k, 1]` the variance is `m₄s + 3m₂²(1 − s) − m₂²`,
/// linear in `s`, so the sup sits at an endpoint.
pub fn upsilon_iid(law: &ScalarLaw, k: usize) -> Option<f64> {
    if law.mean()? != 0.0 || k == 0 {
        return None;
    }
    let (m2, m4) = (law.second_moment()?, law.fourth_moment()?);
    let at = |s: f64| m4 * s + 3.0 * m2 * m2 * (1.0 - s) - m2 * m2;
    Some(at(1.0).max(at(1.0 / k as f64)))
}

/// Minimum Rayleigh quotient of `sigma_hat` over random members of the cone
/// `‖θ(Sᶜ)‖₁ ≤ δ‖θ(S)‖₁`; an upper bound on the cone minimum.
pub fn cone_min_oracle(
    sigma_hat: &DMatrix<f64>,
    support: &[usize],
    delta: f64,
    trials: usize,
    stream: &RngStream,
) -> Result<f64> {
    linalg::check_symmetric(sigma_hat)?;
    let p = sigma_hat.nrows();
    ensure(!support.is_empty(), || "support must be nonempty".into())?;
    ensure(trials >= 1, || "trials must be >= 1".into())?;
    ensure(delta.is_finite() && delta >= 1.0, || format!("delta must be >= 1, got {delta}"))?;
    let mut in_s = vec![false; p];
    for &j in support {
        ensure(j < p, || format!("support index {j} out of range for p = {p}"))?;
        in_s[j] = true;
    }
    let outside: Vec<usize> = (0..p).filter(|&j| !in_s[j]).collect();
    let mut rng = stream.rng();
    let mut theta = DVector::<f64>::zeros(p);
    let mut best = f64::INFINITY;
    for _ in 0..trials {
        theta.fill(0.0);
        let mut norm2 = 0.0;
        for &j in support {
            let g: f64 = rng.sample(StandardNormal);
            theta[j] = g;
            norm2 += g * g;
        }
        let norm = norm2.sqrt().max(f64::MIN_POSITIVE);
        let mut l1_s = 0.0;
        for &j in support {
            theta[j] /= norm;
            l1_s += theta[j].abs();
        }
        if !outside.is_empty() {
            let raw: Vec<f64> = outside.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let l1: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
            let mass = delta * l1_s * rng.random::<f64>();
            for (&j, v) in outside.iter().zip(&raw) {
                theta[j] = v * mass / l1;
            }
        }
        let quad = theta.dot(&(sigma_hat * &theta));
        best = best.min(quad / theta.norm_squared());
    }
    Ok(best)
}
