//! Orlicz-type functions and plug-in norms.
//!
//! Every supported function `g` has an inverse that depends on `t` only
//! through `u = log(1 + t)`. Internally we work with that "log domain"
//! representation `g⁻¹(t) = h(log(1+t))`, so `g(x) = expm1(h⁻¹(x))`. This keeps
//! evaluation finite well past the point where `g(x)` itself overflows.

pub mod constants;

pub use constants::BoundConstants;

use crate::error::{ensure, ensure_finite_nonneg, Error, Result};

/// Default relative tolerance for inverting `h` by bisection.
pub const FUNCTION_REL_TOL: f64 = 1e-13;
/// Default relative tolerance for empirical norm bisection.
pub const NORM_REL_TOL: f64 = 1e-6;
/// Default grid for moment-growth suprema.
pub const DEFAULT_R_MAX: f64 = 200.0;
pub const DEFAULT_R_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrliczFamily {
    /// `ψ_α(x) = exp(x^α) − 1`.
    PsiAlpha,
    /// `Ψ_{α,L}`, defined through its inverse `√log(1+t) + L(log(1+t))^{1/α}`.
    GboPsi,
    /// `φ_{α,L}(x) = exp(min{x², (x/L)^α}) − 1`, the closed-form companion of `Ψ_{α,L}`.
    GboPhi,
    /// Inverse `Σ_j L_j (log(1+t))^{1/α_j}`.
    MultiRegime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrliczSpec {
    pub family: OrliczFamily,
    pub alpha: f64,
    pub scale_l: f64,
    /// `(alpha_j, L_j)` pairs, only read by [`OrliczFamily::MultiRegime`].
    pub regimes: Vec<(f64, f64)>,
}

impl OrliczSpec {
    pub fn psi(alpha: f64) -> Result<Self> {
        Self::build(OrliczFamily::PsiAlpha, alpha, 0.0, Vec::new())
    }

    pub fn gbo(alpha: f64, scale_l: f64) -> Result<Self> {
        Self::build(OrliczFamily::GboPsi, alpha, scale_l, Vec::new())
    }

    pub fn gbo_phi(alpha: f64, scale_l: f64) -> Result<Self> {
        Self::build(OrliczFamily::GboPhi, alpha, scale_l, Vec::new())
    }

    pub fn multi_regime(regimes: Vec<(f64, f64)>) -> Result<Self> {
        let alpha = regimes.first().map(|r| r.0).unwrap_or(1.0);
        Self::build(OrliczFamily::MultiRegime, alpha, 0.0, regimes)
    }

    fn build(family: OrliczFamily, alpha: f64, scale_l: f64, regimes: Vec<(f64, f64)>) -> Result<Self> {
        let spec = Self { family, alpha, scale_l, regimes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Argument(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.scale_l.is_finite() && self.scale_l >= 0.0) {
            return Err(Error::Argument(format!("L must be nonnegative, got {}", self.scale_l)));
        }
        match self.family {
            OrliczFamily::GboPhi if self.scale_l == 0.0 => {
                Err(Error::Argument("phi_{alpha,L} requires L > 0".into()))
            }
            OrliczFamily::MultiRegime => {
                ensure(!self.regimes.is_empty(), || "multi-regime spec needs at least one regime".into())?;
                for &(a, l) in &self.regimes {
                    ensure(a.is_finite() && a > 0.0, || format!("regime alpha must be positive, got {a}"))?;
                    ensure(l.is_finite() && l >= 0.0, || format!("regime L must be nonnegative, got {l}"))?;
                }
                ensure(self.regimes.iter().any(|r| r.1 > 0.0), || {
                    "multi-regime spec needs some L_j > 0".into()
                })
            }
            _ => Ok(()),
        }
    }

    /// `h(u)` with `g⁻¹(t) = h(log(1+t))`.
    pub fn inverse_in_log(&self, u: f64) -> f64 {
        let (a, l) = (self.alpha, self.scale_l);
        match self.family {
            OrliczFamily::PsiAlpha => u.powf(1.0 / a),
            OrliczFamily::GboPsi => u.sqrt() + l * u.powf(1.0 / a),
            OrliczFamily::GboPhi => u.sqrt().max(l * u.powf(1.0 / a)),
            OrliczFamily::MultiRegime => self.regimes.iter().map(|&(aj, lj)| lj * u.powf(1.0 / aj)).sum(),
        }
    }

    /// `log(1 + g(x))`, i.e. `h⁻¹(x)`. Finite for every finite `x`.
    pub fn log1p_function(&self, x: f64) -> Result<f64> {
        ensure_finite_nonneg("x", x)?;
        Ok(self.log1p_unchecked(x))
    }

    fn log1p_unchecked(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let (a, l) = (self.alpha, self.scale_l);
        match self.family {
            OrliczFamily::PsiAlpha => x.powf(a),
            OrliczFamily::GboPhi => (x * x).min((x / l).powf(a)),
            OrliczFamily::GboPsi => {
                if l == 0.0 {
                    return x * x;
                }
                // √u ≤ x and L u^{1/α} ≤ x bound u above; one of the two
                // terms is at least x/2, which bounds u below.
                let hi = (x * x).min((x / l).powf(a));
                let lo = (0.25 * x * x).min((0.5 * x / l).powf(a));
                self.bisect_log(x, lo, hi)
            }
            OrliczFamily::MultiRegime => {
                let k = self.regimes.len() as f64;
                let mut hi = f64::INFINITY;
                let mut lo = f64::INFINITY;
                for &(aj, lj) in &self.regimes {
                    if lj > 0.0 {
                        hi = hi.min((x / lj).powf(aj));
                        lo = lo.min((x / (k * lj)).powf(aj));
                    }
                }
                self.bisect_log(x, lo, hi)
            }
        }
    }

    fn bisect_log(&self, x: f64, mut lo: f64, mut hi: f64) -> f64 {
        if !hi.is_finite() {
            return f64::INFINITY;
        }
        for _ in 0..400 {
            if hi - lo <= FUNCTION_REL_TOL * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.inverse_in_log(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Evaluate `g(x)`. Overflows to `+∞` for very large arguments.
    pub fn eval_function(&self, x: f64) -> Result<f64> {
        Ok(self.log1p_function(x)?.exp_m1())
    }

    /// Evaluate `g⁻¹(t)` in closed form.
    pub fn eval_inverse(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
        }
        Ok(self.inverse_in_log(t.ln_1p()))
    }

    /// Mean of `g(|x_i| / eta)` over the sample.
    pub fn empirical_mean(&self, sample: &[f64], eta: f64) -> f64 {
        let total: f64 = sample.iter().map(|&x| self.log1p_unchecked(x.abs() / eta).exp_m1()).sum();
        total / sample.len() as f64
    }
}

/// Plug-in Orlicz norm of an empirical distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Absolute bisection half-width around `value`.
    pub tolerance: f64,
    pub evaluations: usize,
    /// The sample was identically zero; `value` is 0.
    pub degenerate: bool,
}

/// Smallest `η` with `mean_i g(|x_i|/η) ≤ 1`, to relative tolerance `tol`.
///
/// The mean is continuous and strictly decreasing in `η` once some `x_i ≠ 0`,
/// and `[max|x|/g⁻¹(m), max|x|/g⁻¹(1/m)]` always brackets the root.
pub fn empirical_norm(sample: &[f64], spec: &OrliczSpec, tol: f64) -> Result<NormEstimate> {
    if sample.is_empty() {
        return Err(Error::Argument("empirical norm of an empty sample".into()));
    }
    ensure(tol.is_finite() && tol > 0.0, || format!("tolerance must be positive, got {tol}"))?;
    spec.validate()?;
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("sample contains non-finite values".into()));
    }
    let xmax = sample.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if xmax == 0.0 {
        return Ok(NormEstimate { value: 0.0, tolerance: 0.0, evaluations: 0, degenerate: true });
    }
    let m = sample.len() as f64;
    let feasible = |eta: f64| spec.empirical_mean(sample, eta) <= 1.0;
    let mut evaluations = 0usize;

    let mut lo = xmax / spec.eval_inverse(m)?;
    let mut hi = xmax / spec.eval_inverse(1.0 / m)?;
    // The bracket is exact in theory; guard against rounding at the edges.
    while !feasible(hi) {
        evaluations += 1;
        hi *= 2.0;
    }
    while lo > 0.0 && feasible(lo) {
        evaluations += 1;
        lo *= 0.5;
    }
    evaluations += 2;
    while hi - lo > 2.0 * tol * hi {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(NormEstimate {
        value: 0.5 * (lo + hi),
        tolerance: 0.5 * (hi - lo),
        evaluations,
        degenerate: false,
    })
}

fn r_grid(r_max: f64, step: f64) -> Result<impl Iterator<Item = f64>> {
    ensure(r_max.is_finite() && r_max >= 1.0, || format!("r_max must be >= 1, got {r_max}"))?;
    ensure(step.is_finite() && step > 0.0, || format!("grid step must be positive, got {step}"))?;
    let count = ((r_max - 1.0) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(move |i| 1.0 + i as f64 * step))
}

/// `log ‖X‖_r` of the empirical law, computed relative to `max|x|`.
fn log_lr_norm(abs_scaled: &[f64], log_max: f64, r: f64) -> f64 {
    let mean = abs_scaled.iter().map(|&x| x.powf(r)).sum::<f64>() / abs_scaled.len() as f64;
    log_max + mean.ln() / r
}

fn scaled_abs(sample: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
    if sample.is_empty() {
        return Err(Error::Argument("moment growth of an empty sample".into()));
    }
    let xmax = sample.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if xmax == 0.0 {
        return Ok(None);
    }
    Ok(Some((sample.iter().map(|x| x.abs() / xmax).collect(), xmax.ln())))
}

/// Grid lower approximation of `sup_{r≥1} r^{-1/α} ‖X‖_r` for the empirical law.
pub fn moment_growth_norm(sample: &[f64], alpha: f64, r_max: f64, grid_step: f64) -> Result<f64> {
    ensure(alpha.is_finite() && alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
    let grid = r_grid(r_max, grid_step)?;
    let Some((scaled, log_max)) = scaled_abs(sample)? else {
        return Ok(0.0);
    };
    Ok(grid
        .map(|r| (log_lr_norm(&scaled, log_max, r) - r.ln() / alpha).exp())
        .fold(0.0, f64::max))
}

/// Grid lower approximation of `sup_{r≥1} ‖X‖_r / (√r + L r^{1/α})`, the
/// moment functional that is equivalent to the `Ψ_{α,L}` norm.
pub fn gbo_moment_norm(sample: &[f64], alpha: f64, scale_l: f64, r_max: f64, grid_step: f64) -> Result<f64> {
    ensure(alpha.is_finite() && alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
    ensure_finite_nonneg("L", scale_l)?;
    let grid = r_grid(r_max, grid_step)?;
    let Some((scaled, log_max)) = scaled_abs(sample)? else {
        return Ok(0.0);
    };
    Ok(grid
        .map(|r| {
            let denom = r.sqrt() + scale_l * r.powf(1.0 / alpha);
            (log_lr_norm(&scaled, log_max, r) - denom.ln()).exp()
        })
        .fold(0.0, f64::max))
}

/// True when doubling `r_max` moves the grid supremum by less than 0.1%.
pub fn moment_grid_converged(
    eval: impl Fn(f64) -> Result<f64>,
    r_max: f64,
) -> Result<bool> {
    let base = eval(r_max)?;
    let doubled = eval(2.0 * r_max)?;
    Ok(base == doubled || (doubled - base).abs() <= 1e-3 * doubled.abs())
}

/// A threshold together with the probability bound that accompanies it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub threshold: f64,
    pub prob_bound: f64,
}

/// `P(|X| ≥ δ(√t + L t^{1/α})) ≤ 2e^{-t}` for `δ = ‖X‖_{Ψ_{α,L}}`.
pub fn gbo_tail_threshold(delta: f64, alpha: f64, scale_l: f64, t: f64) -> Result<TailPoint> {
    ensure_finite_nonneg("delta", delta)?;
    ensure_finite_nonneg("L", scale_l)?;
    ensure_finite_nonneg("t", t)?;
    ensure(alpha.is_finite() && alpha > 0.0, || format!("alpha must be positive, got {alpha}"))?;
    Ok(TailPoint {
        threshold: delta * (t.sqrt() + scale_l * t.powf(1.0 / alpha)),
        prob_bound: (2.0 * (-t).exp()).min(1.0),
    })
}

/// Tail of the maximum of `count` variables with GBO norms at most `delta`.
/// `count` is real-valued (only `log count` enters).
pub fn maximal_threshold(delta: f64, alpha: f64, scale_l: f64, count: f64, t: f64) -> Result<TailPoint> {
    ensure(count.is_finite() && count >= 1.0, || format!("N must be >= 1, got {count}"))?;
    let shifted = t + count.ln();
    let base = gbo_tail_threshold(delta, alpha, scale_l, shifted)?;
    Ok(TailPoint { threshold: base.threshold, prob_bound: (2.0 * (-t).exp()).min(1.0) })
}

/// `√2 ‖X_k‖ Ψ⁻¹_{α, S(α)L}(k)`, the normaliser in the sharper maximal inequality.
pub fn sharper_maximal_denominator(k: f64, alpha: f64, scale_l: f64, norm_k: f64) -> Result<f64> {
    ensure(k.is_finite() && k >= 1.0, || format!("k must be >= 1, got {k}"))?;
    ensure_finite_nonneg("norm", norm_k)?;
    let spec = OrliczSpec::gbo(alpha, constants::s_alpha(alpha) * scale_l)?;
    Ok(std::f64::consts::SQRT_2 * norm_k * spec.eval_inverse(k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn psi_closed_forms() {
        let psi2 = OrliczSpec::psi(2.0).unwrap();
        assert!(rel(psi2.eval_function(1.0).unwrap(), E - 1.0) < 1e-15);
        let psi_half = OrliczSpec::psi(0.5).unwrap();
        assert!(rel(psi_half.eval_function(4.0).unwrap(), E * E - 1.0) < 1e-14);
    }

    #[test]
    fn gbo_function_by_bisection() {
        let gbo = OrliczSpec::gbo(1.0, 1.0).unwrap();
        assert!(rel(gbo.eval_function(2.0).unwrap(), E - 1.0) < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let g = OrliczSpec::gbo(2.0, 0.0).unwrap();
        assert!(rel(g.eval_inverse(E - 1.0).unwrap(), 1.0) < 1e-15);
        let g = OrliczSpec::gbo(0.5, 2.0).unwrap();
        assert!(rel(g.eval_inverse(E.powi(4) - 1.0).unwrap(), 34.0) < 1e-13);
        let m = OrliczSpec::multi_regime(vec![(0.5, 1.0), (1.0, 1.0)]).unwrap();
        assert!(rel(m.eval_inverse(E - 1.0).unwrap(), 2.0) < 1e-15);
        let phi = OrliczSpec::gbo_phi(1.0, 3.0).unwrap();
        // max{√u, 3u} at u = 1
        assert!(rel(phi.eval_inverse(E - 1.0).unwrap(), 3.0) < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let g = OrliczSpec::psi(1.0).unwrap();
        assert!(matches!(g.eval_function(-1.0), Err(Error::Domain(_))));
        assert!(matches!(g.eval_function(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(g.eval_function(f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(g.eval_inverse(-0.5), Err(Error::Domain(_))));
        assert!(OrliczSpec::gbo_phi(1.0, 0.0).is_err());
        assert!(OrliczSpec::psi(0.0).is_err());
        assert!(OrliczSpec::gbo(1.0, -1.0).is_err());
        assert!(OrliczSpec::multi_regime(vec![]).is_err());
        assert!(OrliczSpec::multi_regime(vec![(1.0, 0.0)]).is_err());
    }

    fn all_specs() -> Vec<OrliczSpec> {
        let mut specs = Vec::new();
        for &a in &[0.5, 1.0, 2.0, 3.0] {
            specs.push(OrliczSpec::psi(a).unwrap());
            for &l in &[0.0, 0.3, 1.0, 5.0] {
                specs.push(OrliczSpec::gbo(a, l).unwrap());
                if l > 0.0 {
                    specs.push(OrliczSpec::gbo_phi(a, l).unwrap());
                }
            }
        }
        specs.push(OrliczSpec::multi_regime(vec![(2.0, 1.0), (1.0, 0.5), (0.5, 0.1)]).unwrap());
        specs
    }

    #[test]
    fn inverse_consistency_on_log_grid() {
        for spec in all_specs() {
            for i in 0..=90 {
                let x = 10f64.powf(-6.0 + i as f64 / 10.0);
                let gx = spec.eval_function(x).unwrap();
                if gx.is_finite() {
                    let back = spec.eval_inverse(gx).unwrap();
                    assert!(rel(back, x) < 1e-9, "{spec:?} x={x} back={back}");
                }
                // The log-domain route never overflows.
                let u = spec.log1p_function(x).unwrap();
                assert!(rel(spec.inverse_in_log(u), x) < 1e-9, "{spec:?} x={x}");
            }
        }
    }

    proptest! {
        #[test]
        fn phi_sandwiches_psi(alpha in 0.2f64..3.0, l in 0.05f64..5.0, x in 0.0f64..50.0) {
            let psi = OrliczSpec::gbo(alpha, l).unwrap();
            let phi = OrliczSpec::gbo_phi(alpha, l).unwrap();
            // φ(x/2) ≤ Ψ(x) ≤ φ(x), compared in the log domain
            let lpsi = psi.log1p_function(x).unwrap();
            prop_assert!(phi.log1p_function(x / 2.0).unwrap() <= lpsi * (1.0 + 1e-12) + 1e-300);
            prop_assert!(lpsi <= phi.log1p_function(x).unwrap() * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn function_is_monotone(alpha in 0.2f64..3.0, l in 0.0f64..5.0, x in 0.0f64..20.0, dx in 0.0f64..5.0) {
            let psi = OrliczSpec::gbo(alpha, l).unwrap();
            prop_assert!(psi.log1p_function(x).unwrap() <= psi.log1p_function(x + dx).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn empirical_norm_of_constant_sample() {
        let sample = vec![1.0; 17];
        let est = empirical_norm(&sample, &OrliczSpec::psi(1.0).unwrap(), 1e-9).unwrap();
        assert!((est.value - 1.0 / 2f64.ln()).abs() <= est.tolerance + 1e-12);
        assert!(!est.degenerate);
    }

    #[test]
    fn empirical_norm_zero_and_empty() {
        let est = empirical_norm(&[0.0, 0.0, 0.0], &OrliczSpec::psi(2.0).unwrap(), 1e-6).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.value, 0.0);
        assert!(empirical_norm(&[], &OrliczSpec::psi(2.0).unwrap(), 1e-6).is_err());
        assert!(empirical_norm(&[1.0], &OrliczSpec::psi(2.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn empirical_norm_is_homogeneous() {
        let sample: Vec<f64> = (1..40).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let spec = OrliczSpec::gbo(0.7, 0.4).unwrap();
        let base = empirical_norm(&sample, &spec, 1e-8).unwrap();
        for &c in &[-3.0, 0.01, 250.0] {
            let scaled: Vec<f64> = sample.iter().map(|x| c * x).collect();
            let est = empirical_norm(&scaled, &spec, 1e-8).unwrap();
            let tol = (est.tolerance + base.tolerance * c.abs()) * (1.0 + c.abs()) + 1e-12;
            assert!((est.value - c.abs() * base.value).abs() <= tol);
        }
    }

    #[test]
    fn moment_growth_examples() {
        let ones = vec![1.0; 10];
        assert!((moment_growth_norm(&ones, 1.0, 50.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(moment_growth_norm(&[0.0; 4], 0.7, 50.0, 0.5).unwrap(), 0.0);
        assert!(moment_growth_norm(&[], 1.0, 50.0, 0.5).is_err());
        assert!(moment_growth_norm(&ones, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn tail_threshold_examples() {
        let p = gbo_tail_threshold(1.0, 1.0, 1.0, 4.0).unwrap();
        assert!((p.threshold - 6.0).abs() < 1e-15);
        assert!((p.prob_bound - 2.0 * (-4f64).exp()).abs() < 1e-15);
        let p = gbo_tail_threshold(1.0, 2.0, 0.0, 2f64.ln()).unwrap();
        assert!((p.prob_bound - 1.0).abs() < 1e-15);
        assert_eq!(gbo_tail_threshold(0.0, 0.3, 7.0, 3.0).unwrap().threshold, 0.0);
        assert!(gbo_tail_threshold(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn maximal_threshold_examples() {
        assert!((maximal_threshold(1.0, 1.0, 1.0, E, 0.0).unwrap().threshold - 2.0).abs() < 1e-14);
        assert_eq!(maximal_threshold(3.0, 0.5, 2.0, 1.0, 0.0).unwrap().threshold, 0.0);
        assert!((maximal_threshold(2.0, 2.0, 0.0, E.powi(4), 0.0).unwrap().threshold - 4.0).abs() < 1e-14);
        assert!(maximal_threshold(1.0, 1.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn sharper_maximal_examples() {
        let v = sharper_maximal_denominator(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((v - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-14);
        assert_eq!(sharper_maximal_denominator(5.0, 1.0, 2.0, 0.0).unwrap(), 0.0);
        let v = sharper_maximal_denominator(E - 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-13);
    }
}
