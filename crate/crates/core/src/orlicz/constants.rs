//! Closed-form constants attached to the GBO norm, plus the abstract constants
//! that only have existence guarantees and are therefore configurable.

use std::f64::consts::{E, LN_2, PI, SQRT_2};

use crate::error::{Error, Result};

/// `c(α) = 3^{1/α}/√3`, the scale inflation when converting a tail bound back
/// into a GBO norm bound.
pub fn c_tail(alpha: f64) -> f64 {
    3f64.powf(1.0 / alpha) / 3f64.sqrt()
}

/// `M(α) = max{1, 2^{(1-α)/α}}`.
pub fn m_alpha(alpha: f64) -> f64 {
    1f64.max(2f64.powf((1.0 - alpha) / alpha))
}

/// `K(α) = c(α)M(α)`.
pub fn k_alpha(alpha: f64) -> f64 {
    c_tail(alpha) * m_alpha(alpha)
}

/// `S(α) = 2^{1/α}M(α)/2`.
pub fn s_alpha(alpha: f64) -> f64 {
    2f64.powf(1.0 / alpha) * m_alpha(alpha) / 2.0
}

/// Quasi-norm constant: `2e(4/α)^{1/α}` for `α < 1`, `1` otherwise.
pub fn q_alpha(alpha: f64) -> f64 {
    if alpha < 1.0 {
        2.0 * E * (4.0 / alpha).powf(1.0 / alpha)
    } else {
        1.0
    }
}

/// Lower moment-equivalence constant `½ min{1, α^{1/α}}`.
pub fn c_moment_lower(alpha: f64) -> f64 {
    0.5 * 1f64.min(alpha.powf(1.0 / alpha))
}

/// Upper moment-equivalence constant `e max{2, 4^{1/α}}`.
pub fn c_moment_upper(alpha: f64) -> f64 {
    E * 2f64.max(4f64.powf(1.0 / alpha))
}

/// The weighted-sum constant `C(α)`.
pub fn c_weighted_sum(alpha: f64) -> f64 {
    let lead = SQRT_2.max(2f64.powf(1.0 / alpha));
    let branch = if alpha < 1.0 {
        8f64.sqrt()
            * E.powi(3)
            * (2.0 * PI).powf(0.25)
            * (1.0f64 / 24.0).exp()
            * ((2.0 / E).exp() / alpha).powf(1.0 / alpha)
    } else {
        4.0 * E + 2.0 * LN_2.powf(1.0 / alpha)
    };
    lead * branch
}

/// Every constant used by the bound evaluators.
///
/// The closed forms are computed from `alpha`; the remaining fields are
/// constants whose existence is known but whose values are not, so they
/// default to 1 and are meant to be overridden by configuration. Reports
/// echo the whole struct so runs stay reproducible under any choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub alpha: f64,
    pub c: f64,
    pub m: f64,
    pub k: f64,
    pub s: f64,
    pub q: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub c_sum: f64,
    /// `C_α` of the small-α variance bound.
    pub c_alpha_thm32: f64,
    /// Ledoux-Talagrand constant `K_α` (non-canonical default 1).
    pub k_alpha_lt: f64,
    /// `C_α` of the large-α variance bound.
    pub c_alpha_thm33: f64,
    /// `C_α` of the max-of-averages bound (also used by the kernel bound).
    pub c_alpha_thm34: f64,
    /// `C_α` of the covariance max-norm, RIP and restricted convexity bounds.
    pub c_alpha_cov: f64,
    /// `C_α` of the polynomial-tail Lasso regularisation.
    pub c_alpha_poly: f64,
    pub k1_clt: f64,
    pub k2_clt: f64,
    pub c_beta_b_clt: f64,
    pub c_gamma_lasso: f64,
}

/// Names accepted by [`BoundConstants::set`], in echo order.
pub const ABSTRACT_CONSTANTS: [&str; 10] = [
    "c_alpha_thm32",
    "k_alpha_lt",
    "c_alpha_thm33",
    "c_alpha_thm34",
    "c_alpha_cov",
    "c_alpha_poly",
    "k1_clt",
    "k2_clt",
    "c_beta_b_clt",
    "c_gamma_lasso",
];

impl BoundConstants {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self {
            alpha,
            c: c_tail(alpha),
            m: m_alpha(alpha),
            k: k_alpha(alpha),
            s: s_alpha(alpha),
            q: q_alpha(alpha),
            c_lower: c_moment_lower(alpha),
            c_upper: c_moment_upper(alpha),
            c_sum: c_weighted_sum(alpha),
            c_alpha_thm32: 1.0,
            k_alpha_lt: 1.0,
            c_alpha_thm33: 1.0,
            c_alpha_thm34: 1.0,
            c_alpha_cov: 1.0,
            c_alpha_poly: 1.0,
            k1_clt: 1.0,
            k2_clt: 1.0,
            c_beta_b_clt: 1.0,
            c_gamma_lasso: 1.0,
        })
    }

    /// Same abstract constants, closed forms recomputed for another `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let fresh = Self::new(alpha)?;
        Ok(Self {
            c_alpha_thm32: self.c_alpha_thm32,
            k_alpha_lt: self.k_alpha_lt,
            c_alpha_thm33: self.c_alpha_thm33,
            c_alpha_thm34: self.c_alpha_thm34,
            c_alpha_cov: self.c_alpha_cov,
            c_alpha_poly: self.c_alpha_poly,
            k1_clt: self.k1_clt,
            k2_clt: self.k2_clt,
            c_beta_b_clt: self.c_beta_b_clt,
            c_gamma_lasso: self.c_gamma_lasso,
            ..fresh
        })
    }

    /// Override one abstract constant by name. Values must be strictly positive.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Argument(format!("constant {name} must be positive, got {value}")));
        }
        let slot = match name {
            "c_alpha_thm32" => &mut self.c_alpha_thm32,
            "k_alpha_lt" => &mut self.k_alpha_lt,
            "c_alpha_thm33" => &mut self.c_alpha_thm33,
            "c_alpha_thm34" => &mut self.c_alpha_thm34,
            "c_alpha_cov" => &mut self.c_alpha_cov,
            "c_alpha_poly" => &mut self.c_alpha_poly,
            "k1_clt" => &mut self.k1_clt,
            "k2_clt" => &mut self.k2_clt,
            "c_beta_b_clt" => &mut self.c_beta_b_clt,
            "c_gamma_lasso" => &mut self.c_gamma_lasso,
            other => return Err(Error::Argument(format!("unknown constant {other}"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "c_alpha_thm32" => self.c_alpha_thm32,
            "k_alpha_lt" => self.k_alpha_lt,
            "c_alpha_thm33" => self.c_alpha_thm33,
            "c_alpha_thm34" => self.c_alpha_thm34,
            "c_alpha_cov" => self.c_alpha_cov,
            "c_alpha_poly" => self.c_alpha_poly,
            "k1_clt" => self.k1_clt,
            "k2_clt" => self.k2_clt,
            "c_beta_b_clt" => self.c_beta_b_clt,
            "c_gamma_lasso" => self.c_gamma_lasso,
            _ => return None,
        })
    }

    /// Compact `name=value;...` rendering of the abstract constants.
    pub fn echo(&self) -> String {
        ABSTRACT_CONSTANTS
            .iter()
            .map(|name| format!("{name}={}", self.get(name).unwrap_or(f64::NAN)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self::new(1.0).expect("alpha = 1 is valid")
    }
}
