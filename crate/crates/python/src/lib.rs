//! Python bindings: sampling laws, Orlicz norms, sparse covariance, the Lasso
//! solver, tail and CLT bounds, and the experiment runner.

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use subweibull_core::covariance::{gram as core_gram, hard_threshold as core_hard_threshold, quarter_net, rip_exact, rip_net};
use subweibull_core::hdclt::hdclt_bound as core_hdclt_bound;
use subweibull_core::lasso::{objective, solve, LassoProblem};
use subweibull_core::orlicz::{empirical_norm, BoundConstants, OrliczSpec, NORM_REL_TOL};
use subweibull_core::samplers::{draw_many, DataMatrix, RngStream, ScalarLaw};
use subweibull_core::tailbounds::max_average_threshold;
use subweibull_sim::{parse_config, RunOptions, EXPERIMENTS};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(PyValueError::new_err("expected a non-empty rectangular list of rows"));
    }
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// A scalar sampling law.
#[pyclass(name = "Law", frozen)]
#[derive(Clone)]
struct PyLaw(ScalarLaw);

#[pymethods]
impl PyLaw {
    #[staticmethod]
    fn weibull(alpha: f64) -> Self {
        Self(ScalarLaw::SymmetricWeibull { alpha })
    }

    #[staticmethod]
    fn centered_weibull(alpha: f64) -> Self {
        Self(ScalarLaw::CenteredWeibull { alpha })
    }

    #[staticmethod]
    #[pyo3(signature = (sigma = 1.0))]
    fn gaussian(sigma: f64) -> Self {
        Self(ScalarLaw::Gaussian { sigma })
    }

    #[staticmethod]
    #[pyo3(signature = (rate = 1.0))]
    fn exponential(rate: f64) -> Self {
        Self(ScalarLaw::Exponential { rate })
    }

    #[staticmethod]
    #[pyo3(signature = (shape, scale = 1.0))]
    fn pareto(shape: f64, scale: f64) -> Self {
        Self(ScalarLaw::Pareto { shape, scale })
    }

    #[staticmethod]
    fn student_t(dof: f64) -> Self {
        Self(ScalarLaw::StudentT { dof })
    }

    /// `m` draws from stream `stream` of `seed`.
    #[pyo3(signature = (m, seed, stream = 0))]
    fn draw(&self, m: usize, seed: u64, stream: u64) -> PyResult<Vec<f64>> {
        draw_many(&self.0, m, &RngStream::new(seed, stream)).map_err(value_err)
    }

    fn mean(&self) -> Option<f64> {
        self.0.mean()
    }

    /// Analytic ψ_α norm, when known.
    fn psi_norm(&self, alpha: f64) -> Option<f64> {
        self.0.psi_norm(alpha)
    }

    fn __repr__(&self) -> String {
        format!("Law({:?})", self.0)
    }
}

/// Empirical Orlicz norm of a sample: `kind` is "psi", "gbo" or "gbo_phi".
#[pyfunction]
#[pyo3(signature = (sample, alpha, kind = "psi", l = 1.0, tol = NORM_REL_TOL))]
fn orlicz_norm(sample: Vec<f64>, alpha: f64, kind: &str, l: f64, tol: f64) -> PyResult<f64> {
    let spec = match kind {
        "psi" => OrliczSpec::psi(alpha),
        "gbo" => OrliczSpec::gbo(alpha, l),
        "gbo_phi" => OrliczSpec::gbo_phi(alpha, l),
        other => return Err(PyValueError::new_err(format!("unknown norm kind {other:?}"))),
    }
    .map_err(value_err)?;
    Ok(empirical_norm(&sample, &spec, tol).map_err(value_err)?.value)
}

/// `(1/n) XᵀX` for a list of rows.
#[pyfunction]
fn gram(x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let data = DataMatrix::new(matrix(&x)?).map_err(value_err)?;
    Ok(rows(&core_gram(&data)))
}

#[pyfunction]
fn hard_threshold(m: Vec<Vec<f64>>, lam: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(&core_hard_threshold(&matrix(&m)?, lam).map_err(value_err)?))
}

/// Largest `k`-sparse quadratic form of a symmetric matrix, exact or over a quarter net.
#[pyfunction]
#[pyo3(signature = (d, k, method = "exact", cap = 20_000, seed = 0))]
fn rip(d: Vec<Vec<f64>>, k: usize, method: &str, cap: usize, seed: u64) -> PyResult<f64> {
    let d = matrix(&d)?;
    let res = match method {
        "exact" => rip_exact(&d, k),
        "net" => quarter_net(k, d.nrows(), cap, &RngStream::new(seed, 0)).and_then(|net| rip_net(&d, k, &net)),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(res.map_err(value_err)?.value)
}

#[pyclass(frozen, get_all)]
struct LassoFit {
    beta: Vec<f64>,
    lam: f64,
    objective: f64,
    iterations: usize,
    converged: bool,
    kkt_residual: f64,
}

#[pymethods]
impl LassoFit {
    fn __repr__(&self) -> String {
        format!(
            "LassoFit(lam={}, objective={}, iterations={}, converged={})",
            self.lam, self.objective, self.iterations, self.converged
        )
    }
}

/// Coordinate-descent Lasso for `(1/2n)‖y − Xβ‖² + λ‖β‖₁`.
#[pyfunction]
#[pyo3(signature = (x, y, lam, tol = 1e-8, max_iter = 10_000))]
fn lasso(x: Vec<Vec<f64>>, y: Vec<f64>, lam: f64, tol: f64, max_iter: usize) -> PyResult<LassoFit> {
    let data = DataMatrix::new(matrix(&x)?).map_err(value_err)?;
    let problem = LassoProblem::new(data, DVector::from_vec(y)).map_err(value_err)?;
    let fit = solve(&problem, lam, tol, max_iter).map_err(value_err)?;
    Ok(LassoFit {
        objective: objective(&problem, &fit.beta, lam),
        beta: fit.beta.iter().copied().collect(),
        lam,
        iterations: fit.iterations,
        converged: fit.converged,
        kkt_residual: fit.kkt_residual,
    })
}

/// `(threshold, probability bound)` for the maximum of `q` averages of `n` terms.
#[pyfunction]
#[pyo3(signature = (gamma, k, n, q, alpha, t))]
fn tail_threshold(gamma: f64, k: f64, n: usize, q: usize, alpha: f64, t: f64) -> PyResult<(f64, f64)> {
    let c = BoundConstants::new(alpha).map_err(value_err)?;
    let point = max_average_threshold(gamma, k, n, q, alpha, t, &c).map_err(value_err)?;
    Ok((point.threshold, point.prob_bound))
}

/// `(bound, condition_ok)` for the Gaussian approximation of the max statistic.
#[pyfunction]
#[pyo3(signature = (l, k, n, q, beta, b = 1.0))]
fn hdclt_bound(l: f64, k: f64, n: usize, q: usize, beta: f64, b: f64) -> PyResult<(f64, bool)> {
    core_hdclt_bound(l, k, n, q, beta, b, &BoundConstants::default()).map_err(value_err)
}

#[pyfunction]
fn experiments() -> Vec<&'static str> {
    EXPERIMENTS.iter().map(|e| e.name()).collect()
}

/// Run an experiment from config text; returns the output directory.
#[pyfunction]
#[pyo3(signature = (config, out = None, workers = None))]
fn run_experiment(py: Python<'_>, config: &str, out: Option<PathBuf>, workers: Option<usize>) -> PyResult<String> {
    let cfg = parse_config(config).map_err(value_err)?;
    let opts = RunOptions { out, workers };
    let (_, dir) = py
        .allow_threads(|| subweibull_sim::run(&cfg, &opts))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(dir.display().to_string())
}

#[pymodule]
fn subweibull(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLaw>()?;
    m.add_class::<LassoFit>()?;
    m.add_function(wrap_pyfunction!(orlicz_norm, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(hard_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(rip, m)?)?;
    m.add_function(wrap_pyfunction!(lasso, m)?)?;
    m.add_function(wrap_pyfunction!(tail_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(hdclt_bound, m)?)?;
    m.add_function(wrap_pyfunction!(experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
