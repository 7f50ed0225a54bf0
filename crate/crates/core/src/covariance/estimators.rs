use nalgebra::DMatrix;

use crate::error::{ensure, ensure_finite_nonneg, Error, Result};
use crate::linalg;
use crate::orlicz::{BoundConstants, TailPoint};
use crate::samplers::DataMatrix;

/// A sample matrix paired with its population target.
#[derive(Debug, Clone, PartialEq)]
pub struct GramPair {
    pub sigma_hat: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub centered: bool,
}

impl GramPair {
    /// `Δ_n` (or `Δ_n*` when centered).
    pub fn delta(&self) -> Result<f64> {
        max_elementwise_error(&self.sigma_hat, &self.sigma)
    }
}

/// `(1/n) Σ X_i X_iᵀ`, symmetrized.
pub fn gram(x: &DataMatrix) -> DMatrix<f64> {
    let g = (x.values.transpose() * &x.values) / x.n() as f64;
    linalg::symmetrize(&g)
}

/// `(1/n) Σ (X_i − X̄)(X_i − X̄)ᵀ`.
pub fn centered_cov(x: &DataMatrix) -> Result<DMatrix<f64>> {
    ensure(x.n() >= 2, || format!("centered covariance needs n >= 2, got {}", x.n()))?;
    let mut c = x.values.clone();
    for mut col in c.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    let g = (c.transpose() * &c) / x.n() as f64;
    Ok(linalg::symmetrize(&g))
}

pub fn gram_pair(x: &DataMatrix, sigma: DMatrix<f64>, centered: bool) -> Result<GramPair> {
    let sigma_hat = if centered { centered_cov(x)? } else { gram(x) };
    if sigma.shape() != sigma_hat.shape() {
        return Err(Error::Dimension(format!("population target is {:?}, sample is {:?}", sigma.shape(), sigma_hat.shape())));
    }
    Ok(GramPair { sigma_hat, sigma, centered })
}

/// `max_{j ≤ k} |A(j,k) − B(j,k)|` over the upper triangle.
pub fn max_elementwise_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let p = a.nrows();
    let mut worst = 0.0f64;
    for k in 0..p {
        for j in 0..=k {
            worst = worst.max((a[(j, k)] - b[(j, k)]).abs());
        }
    }
    Ok(worst)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// High-probability threshold for `Δ_n` (`Δ_n*` when `centered`).
#[allow(clippy::too_many_arguments)]
pub fn delta_bound(
    a_np: f64,
    k_np: f64,
    n: usize,
    p: usize,
    alpha: f64,
    t: f64,
    constants: &BoundConstants,
    centered: bool,
) -> Result<TailPoint> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Argument(format!("alpha must be positive, got {alpha}")));
    }
    if alpha > 2.0 {
        return Err(Error::Unsupported(format!("covariance bounds require alpha <= 2, got {alpha}")));
    }
    ensure_finite_nonneg("A_np", a_np)?;
    ensure_finite_nonneg("K_np", k_np)?;
    ensure_finite_nonneg("t", t)?;
    ensure(n >= 1 && p >= 1, || format!("n and p must be >= 1, got n={n}, p={p}"))?;
    let nf = n as f64;
    let s = t + 2.0 * (p as f64).ln();
    let threshold = 7.0 * a_np * (s / nf).sqrt()
        + constants.c_alpha_cov * k_np * k_np * (2.0 * nf).ln().powf(2.0 / alpha) * s.powf(2.0 / alpha) / nf;
    let mult = if centered { 6.0 } else { 3.0 };
    Ok(TailPoint { threshold, prob_bound: (mult * (-t).exp()).min(1.0) })
}

/// Zero out entries with `|value| < lambda`.
pub fn hard_threshold(m: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    linalg::check_symmetric(m)?;
    ensure_finite_nonneg("lambda", lambda)?;
    let s = linalg::symmetrize(m);
    Ok(s.map(|v| if v.abs() < lambda { 0.0 } else { v }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_examples() {
        let x = DataMatrix::from_rows(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(gram(&x), DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]));
        let x = DataMatrix::from_rows(1, 2, &[2.0, 3.0]).unwrap();
        assert_eq!(gram(&x), DMatrix::from_row_slice(2, 2, &[4.0, 6.0, 6.0, 9.0]));
    }

    #[test]
    fn centered_examples() {
        let x = DataMatrix::from_rows(2, 1, &[1.0, -1.0]).unwrap();
        assert_eq!(centered_cov(&x).unwrap()[(0, 0)], 1.0);
        let x = DataMatrix::from_rows(2, 2, &[1.0, 2.0, 1.0, 2.0]).unwrap();
        assert_eq!(centered_cov(&x).unwrap(), DMatrix::zeros(2, 2));
        assert!(centered_cov(&DataMatrix::from_rows(1, 1, &[1.0]).unwrap()).is_err());
    }

    #[test]
    fn max_error_examples() {
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        assert_eq!(max_elementwise_error(&a, &b).unwrap(), 0.5);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.3, 1.0]);
        assert!((max_elementwise_error(&c, &a).unwrap() - 0.3).abs() < 1e-15);
        assert!(max_elementwise_error(&a, &DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn delta_bound_examples() {
        let c = BoundConstants::default();
        assert_eq!(delta_bound(0.0, 0.0, 10, 10, 1.0, 1.0, &c, false).unwrap().threshold, 0.0);
        assert_eq!(delta_bound(1.0, 1.0, 10, 1, 1.0, 0.0, &c, false).unwrap().threshold, 0.0);
        let v = delta_bound(1.0, 0.0, 400, 100, 1.0, 0.0, &c, false).unwrap().threshold;
        let hand = 7.0 * (2.0 * 100f64.ln() / 400.0).sqrt();
        assert!((v - hand).abs() < 1e-14 && (v - 1.0622).abs() < 1e-4);
        assert!(matches!(delta_bound(1.0, 1.0, 10, 10, 2.5, 1.0, &c, false), Err(Error::Unsupported(_))));
        let p = delta_bound(1.0, 1.0, 10, 10, 1.0, 2.0, &c, true).unwrap();
        assert!((p.prob_bound - 6.0 * (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn threshold_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        assert_eq!(hard_threshold(&m, 0.5).unwrap(), DMatrix::identity(2, 2));
        assert_eq!(hard_threshold(&m, 0.0).unwrap(), m);
        assert_eq!(hard_threshold(&m, 2.0).unwrap(), DMatrix::zeros(2, 2));
    }
}
