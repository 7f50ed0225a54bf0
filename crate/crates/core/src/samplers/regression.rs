use nalgebra::{DMatrix, DVector};

use super::{draw_matrix, DataMatrix, RngStream, ScalarLaw, VectorLaw};
use crate::error::{Error, Result};
use crate::linalg;

/// Nonlinear conditional mean `f(x)` for a misspecified model.
pub type ResponseMap<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Rows used per block when streaming the oracle gram.
const ORACLE_BLOCK: usize = 65_536;

#[derive(Debug, Clone, PartialEq)]
pub struct Regression {
    pub x: DataMatrix,
    pub y: DVector<f64>,
    pub eps: DVector<f64>,
    /// The coefficient target: the input `beta0`, or the population
    /// least-squares projection under misspecification.
    pub beta0: DVector<f64>,
}

/// Misspecification settings for [`make_regression`].
pub struct Misspecification<'a> {
    pub map: ResponseMap<'a>,
    pub oracle_n: usize,
}

/// Draw `y = Xβ₀ + ε`, or `y = f(X) + ε` when `misspec` is given.
pub fn make_regression(
    design: &VectorLaw,
    beta0: &DVector<f64>,
    noise: &ScalarLaw,
    n: usize,
    misspec: Option<Misspecification<'_>>,
    stream: &RngStream,
) -> Result<Regression> {
    noise.validate()?;
    if beta0.len() != design.p() {
        return Err(Error::Dimension(format!("beta0 has length {}, design has p = {}", beta0.len(), design.p())));
    }
    if noise.mean().is_none_or(|m| m != 0.0) {
        return Err(Error::Argument("noise law must be mean zero".into()));
    }
    let x = draw_matrix(design, n, &stream.child(0))?;
    let mut rng = stream.child(1).rng();
    let eps = DVector::from_fn(n, |_, _| noise.sample(&mut rng));
    match misspec {
        None => {
            let y = &x.values * beta0 + &eps;
            Ok(Regression { x, y, eps, beta0: beta0.clone() })
        }
        Some(m) => {
            let fx = DVector::from_fn(n, |i, _| (m.map)(&x.row(i)));
            let target = population_beta0(design, m.map, m.oracle_n, &stream.child(2))?;
            Ok(Regression { y: fx + &eps, x, eps, beta0: target })
        }
    }
}

/// `(Σ̂)⁻¹ · mean(X_i f(X_i))` on a fresh `oracle_n`-row sample.
pub fn population_beta0(
    design: &VectorLaw,
    map: ResponseMap<'_>,
    oracle_n: usize,
    stream: &RngStream,
) -> Result<DVector<f64>> {
    design.validate()?;
    if oracle_n == 0 {
        return Err(Error::Argument("oracle sample size must be positive".into()));
    }
    let p = design.p();
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut cross = DVector::<f64>::zeros(p);
    let mut rng = stream.rng();
    let mut row = vec![0.0; p];
    let mut scratch = Vec::new();
    let mut remaining = oracle_n;
    while remaining > 0 {
        let block = remaining.min(ORACLE_BLOCK);
        let mut bg = DMatrix::<f64>::zeros(p, p);
        let mut bc = DVector::<f64>::zeros(p);
        for _ in 0..block {
            design.sample_row(&mut rng, &mut row, &mut scratch);
            let f = map(&row);
            for a in 0..p {
                bc[a] += row[a] * f;
                for b in 0..=a {
                    bg[(a, b)] += row[a] * row[b];
                }
            }
        }
        gram += bg;
        cross += bc;
        remaining -= block;
    }
    for a in 0..p {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    gram /= oracle_n as f64;
    cross /= oracle_n as f64;
    let cond = linalg::condition_number(&gram)?;
    if !(cond <= 1e12) {
        return Err(Error::Singular(format!("oracle gram condition number {cond:e}")));
    }
    gram.cholesky()
        .map(|c| c.solve(&cross))
        .ok_or_else(|| Error::Singular("oracle gram is not positive definite".into()))
}
