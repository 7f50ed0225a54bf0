use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::samplers::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoProblem {
    pub x: DataMatrix,
    pub y: DVector<f64>,
}

impl LassoProblem {
    pub fn new(x: DataMatrix, y: DVector<f64>) -> Result<Self> {
        if y.len() != x.n() {
            return Err(Error::Dimension(format!("y has length {}, X has {} rows", y.len(), x.n())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("response has non-finite entries".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn p(&self) -> usize {
        self.x.p()
    }

    /// `Xᵀv / n`.
    pub fn correlations(&self, v: &DVector<f64>) -> DVector<f64> {
        self.x.values.tr_mul(v) / self.n() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: DVector<f64>,
    pub lambda: f64,
    /// Completed sweeps.
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    /// Objective after each sweep, starting with the value at zero.
    pub objective_trace: Vec<f64>,
}

pub fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// `(1/2n)‖y − Xβ‖² + λ‖β‖₁`.
pub fn objective(problem: &LassoProblem, beta: &DVector<f64>, lambda: f64) -> f64 {
    let r = &problem.y - &problem.x.values * beta;
    r.norm_squared() / (2.0 * problem.n() as f64) + lambda * beta.lp_norm(1)
}

/// Largest violation of the subgradient optimality conditions.
pub fn kkt_residual(problem: &LassoProblem, beta: &DVector<f64>, lambda: f64) -> f64 {
    let r = &problem.y - &problem.x.values * beta;
    kkt_from_residual(problem, beta, &r, lambda)
}

fn kkt_from_residual(problem: &LassoProblem, beta: &DVector<f64>, r: &DVector<f64>, lambda: f64) -> f64 {
    let g = problem.correlations(r);
    g.iter()
        .zip(beta.iter())
        .map(|(&gj, &bj)| if bj == 0.0 { (gj.abs() - lambda).max(0.0) } else { (gj - lambda * bj.signum()).abs() })
        .fold(0.0, f64::max)
}

/// Cyclic coordinate descent from zero.
///
/// Stops once the largest coordinate move in a sweep is below
/// `tol·(1 + ‖β‖_∞)` and the KKT residual is at most `10·tol`.
pub fn solve(problem: &LassoProblem, lambda: f64, tol: f64, max_iter: usize) -> Result<LassoFit> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Argument(format!("lambda must be positive, got {lambda}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let (n, p) = (problem.n(), problem.p());
    let nf = n as f64;
    let x = &problem.x;
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).iter().map(|v| v * v).sum::<f64>() / nf).collect();
    let mut beta = DVector::<f64>::zeros(p);
    let mut r = problem.y.clone();
    let mut trace = vec![r.norm_squared() / (2.0 * nf)];
    let mut kkt = kkt_from_residual(problem, &beta, &r, lambda);
    if kkt <= 10.0 * tol {
        return Ok(LassoFit { beta, lambda, iterations: 0, converged: true, kkt_residual: kkt, objective_trace: trace });
    }
    let rs = r.as_mut_slice();
    for sweep in 1..=max_iter {
        let mut max_move = 0.0f64;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = x.column(j);
            let dot: f64 = col.iter().zip(rs.iter()).map(|(a, b)| a * b).sum();
            let old = beta[j];
            let new = soft_threshold(dot / nf + col_sq[j] * old, lambda) / col_sq[j];
            let delta = new - old;
            if delta != 0.0 {
                for (ri, ci) in rs.iter_mut().zip(col) {
                    *ri -= delta * ci;
                }
                beta[j] = new;
                max_move = max_move.max(delta.abs());
            }
        }
        let rss: f64 = rs.iter().map(|v| v * v).sum();
        trace.push(rss / (2.0 * nf) + lambda * beta.lp_norm(1));
        let scale = 1.0 + beta.amax();
        if max_move < tol * scale {
            let rv = DVector::from_column_slice(rs);
            kkt = kkt_from_residual(problem, &beta, &rv, lambda);
            if kkt <= 10.0 * tol {
                return Ok(LassoFit {
                    beta,
                    lambda,
                    iterations: sweep,
                    converged: true,
                    kkt_residual: kkt,
                    objective_trace: trace,
                });
            }
        }
    }
    let kkt = kkt_residual(problem, &beta, lambda);
    Ok(LassoFit { beta, lambda, iterations: max_iter, converged: false, kkt_residual: kkt, objective_trace: trace })
}
