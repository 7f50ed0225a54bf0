//! Small dense symmetric linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Slack on eigenvalues before a matrix is treated as indefinite.
pub const PSD_CLIP: f64 = -1e-10;

/// Largest `|a_ij − a_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    let scale = m.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let gap = asymmetry(m);
    if gap > 1e-12 * scale {
        return Err(Error::NonSymmetric(gap));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix (Householder tridiagonalization
/// followed by implicit QR).
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_symmetric(m)?;
    Ok(SymmetricEigen::new(symmetrize(m)))
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_symmetric(m)?;
    Ok(symmetrize(m).symmetric_eigenvalues())
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.min())
}

/// Spectral norm of a symmetric matrix, `max |λ_i|`.
pub fn spectral_norm_sym(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0f64, |a, x| a.max(x.abs())))
}

/// `F` with `F Fᵀ = Σ` from the eigen-decomposition, clipping eigenvalues in
/// `[PSD_CLIP, 0)` to zero.
pub fn psd_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(sigma)?;
    let scale = sigma.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < PSD_CLIP * scale {
            return Err(Error::Domain(format!("covariance is indefinite (eigenvalue {v:e})")));
        }
        *v = v.max(0.0).sqrt();
    }
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Condition number `λ_max/λ_min` of a symmetric PSD matrix (∞ if singular).
pub fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    let ev = eigenvalues(m)?;
    let (lo, hi) = (ev.min(), ev.max());
    if lo <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}

/// Gauss-Hermite nodes and weights for `∫ f(x) e^{-x²} dx` (Golub-Welsch).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for i in 1..order {
        let b = (i as f64 / 2.0).sqrt();
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `E f(Z)` for a standard normal `Z` by Gauss-Hermite quadrature.
pub fn normal_expectation(order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite(order);
    let s2 = std::f64::consts::SQRT_2;
    x.iter().zip(&w).map(|(&xi, &wi)| wi * f(s2 * xi)).sum::<f64>() / std::f64::consts::PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        assert!((normal_expectation(40, |_| 1.0) - 1.0).abs() < 1e-13);
        assert!((normal_expectation(40, |z| z * z) - 1.0).abs() < 1e-12);
        assert!((normal_expectation(40, |z| z.powi(4)) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn eigen_and_symmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((min_eigenvalue(&m).unwrap() - 1.0).abs() < 1e-14);
        assert!((spectral_norm_sym(&m).unwrap() - 3.0).abs() < 1e-14);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(min_eigenvalue(&bad), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn factor_reproduces_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 1.5]);
        let f = psd_factor(&m).unwrap();
        assert!((&f * f.transpose() - &m).abs().max() < 1e-13);
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(psd_factor(&neg).is_err());
    }
}
