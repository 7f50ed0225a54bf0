//! Max statistics, their Gaussian analogues, the multiplier bootstrap and the
//! high-dimensional Berry-Esseen bound.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::covariance::{centered_cov, max_elementwise_error};
use crate::error::{ensure, ensure_finite_nonneg, Error, Result};
use crate::linalg;
use crate::orlicz::BoundConstants;
use crate::samplers::{draw_matrix, DataMatrix, RngStream, ScalarLaw, VectorLaw};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxStatSource {
    Data,
    GaussianAnalog,
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxStatSample {
    pub values: Vec<f64>,
    pub n: usize,
    pub q: usize,
    pub source: MaxStatSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// `(level, quantile)` pairs in the order requested.
    pub quantiles: Vec<(f64, f64)>,
    pub draws: usize,
    pub sigma_star: DMatrix<f64>,
    /// `Δ*` against the supplied reference covariance.
    pub delta_star: Option<f64>,
    pub values: Vec<f64>,
}

impl BootstrapResult {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles.iter().find(|(l, _)| *l == level).map(|(_, q)| *q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    pub coverage: f64,
    pub mc_se: f64,
    pub reps: usize,
}

/// `max_j n^{-1/2} Σ_i W_i(j)`.
pub fn max_statistic(w: &DataMatrix) -> f64 {
    let scale = (w.n() as f64).sqrt();
    (0..w.p()).map(|j| w.column(j).iter().sum::<f64>() / scale).fold(f64::NEG_INFINITY, f64::max)
}

/// Centered column sum of `n` iid draws, sampled in one step when the
/// `n`-fold convolution has a closed form.
#[derive(Debug, Clone, Copy)]
enum ExactSum {
    /// `factor·(G − n)` with `G ~ Gamma(n, 1)`.
    Gamma { gamma: Gamma<f64>, n: f64, factor: f64 },
    /// `sd·Z`.
    Normal { sd: f64 },
}

impl ExactSum {
    fn for_law(law: &ScalarLaw, n: usize) -> Option<Self> {
        let nf = n as f64;
        match law {
            ScalarLaw::CenteredWeibull { alpha } if *alpha == 1.0 => {
                Some(ExactSum::Gamma { gamma: Gamma::new(nf, 1.0).ok()?, n: nf, factor: 1.0 })
            }
            ScalarLaw::Exponential { rate } => {
                Some(ExactSum::Gamma { gamma: Gamma::new(nf, 1.0).ok()?, n: nf, factor: 1.0 / rate })
            }
            ScalarLaw::Gaussian { sigma } => Some(ExactSum::Normal { sd: sigma * nf.sqrt() }),
            ScalarLaw::Scaled { law, factor } => match Self::for_law(law, n)? {
                ExactSum::Gamma { gamma, n, factor: f } => Some(ExactSum::Gamma { gamma, n, factor: f * factor }),
                ExactSum::Normal { sd } => Some(ExactSum::Normal { sd: sd * factor.abs() }),
            },
            _ => None,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ExactSum::Gamma { gamma, n, factor } => factor * (gamma.sample(rng) - n),
            ExactSum::Normal { sd } => {
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            }
        }
    }
}

/// Max statistics of `reps` independent `n`-row samples from `law`, after
/// subtracting the population mean.
///
/// Independent coordinates whose law has a closed-form `n`-fold convolution
/// (centered Weibull with `α = 1`, exponential, Gaussian, and their scalings)
/// draw each column sum directly; the statistic has the same law either way.
pub fn data_max_sample(law: &VectorLaw, n: usize, reps: usize, stream: &RngStream) -> Result<MaxStatSample> {
    ensure(reps >= 1, || "reps must be >= 1".into())?;
    law.validate()?;
    ensure(n >= 1, || "n must be >= 1".into())?;
    let mu = law.population_mean().ok_or_else(|| Error::Argument("law has no finite mean".into()))?;
    let q = law.p();
    let mut values = Vec::with_capacity(reps);
    if let VectorLaw::IidCoordinates { law: scalar, .. } = law {
        if let Some(exact) = ExactSum::for_law(scalar, n) {
            let scale = (n as f64).sqrt();
            for r in 0..reps {
                let mut rng = stream.child(r as u64).rng();
                let best = (0..q).map(|_| exact.sample(&mut rng)).fold(f64::NEG_INFINITY, f64::max);
                values.push(best / scale);
            }
            return Ok(MaxStatSample { values, n, q, source: MaxStatSource::Data });
        }
    }
    for r in 0..reps {
        let mut w = draw_matrix(law, n, &stream.child(r as u64))?;
        for (j, m) in mu.iter().enumerate() {
            if *m != 0.0 {
                w.values.column_mut(j).add_scalar_mut(-m);
            }
        }
        values.push(max_statistic(&w));
    }
    Ok(MaxStatSample { values, n, q, source: MaxStatSource::Data })
}

/// `reps` draws of `max_j G(j)` for `G ~ N(0, sigma)`.
pub fn gaussian_analog_sample(
    sigma: &DMatrix<f64>,
    n_eff: usize,
    reps: usize,
    stream: &RngStream,
) -> Result<MaxStatSample> {
    let factor = linalg::psd_factor(sigma)?;
    let q = sigma.nrows();
    let mut rng = stream.rng();
    let mut g = vec![0.0; q];
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        g.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let mut best = f64::NEG_INFINITY;
        for i in 0..q {
            let mut s = 0.0;
            for (k, gk) in g.iter().enumerate() {
                s += factor[(i, k)] * gk;
            }
            best = best.max(s);
        }
        values.push(best);
    }
    Ok(MaxStatSample { values, n: n_eff, q, source: MaxStatSource::GaussianAnalog })
}

/// Largest CDF gap between two max-statistic samples over `grid` pooled
/// quantiles; a lower bound on the distance over all rectangles.
pub fn rho_rectangle_proxy(a: &MaxStatSample, b: &MaxStatSample, grid: usize) -> Result<f64> {
    ensure(!a.values.is_empty() && !b.values.is_empty(), || "samples must be nonempty".into())?;
    ensure(grid >= 1, || "grid must be >= 1".into())?;
    let mut sa = a.values.clone();
    let mut sb = b.values.clone();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let mut pooled: Vec<f64> = sa.iter().chain(&sb).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let cdf = |s: &[f64], u: f64| s.partition_point(|v| *v <= u) as f64 / s.len() as f64;
    let mut best = 0.0f64;
    for i in 0..grid {
        let level = if grid == 1 { 0.5 } else { i as f64 / (grid - 1) as f64 };
        let u = stats::quantile_sorted(&pooled, level);
        best = best.max((cdf(&sa, u) - cdf(&sb, u)).abs());
    }
    Ok(best)
}

/// Berry-Esseen bound over rectangles and whether the sample-size condition holds.
#[allow(clippy::too_many_arguments)]
pub fn hdclt_bound(
    l_nq: f64,
    k_nq: f64,
    n: usize,
    q: usize,
    beta: f64,
    b: f64,
    constants: &BoundConstants,
) -> Result<(f64, bool)> {
    for (name, v) in [("L", l_nq), ("K", k_nq), ("beta", beta), ("B", b)] {
        ensure(v.is_finite() && v > 0.0, || format!("{name} must be positive, got {v}"))?;
    }
    ensure(n >= 1 && q >= 1, || format!("n and q must be >= 1, got n={n}, q={q}"))?;
    hdclt_bound_log_q(l_nq, k_nq, n, (q as f64).ln(), beta, constants)
}

/// [`hdclt_bound`] with `log q` supplied directly (real-valued `q`).
pub fn hdclt_bound_log_q(
    l_nq: f64,
    k_nq: f64,
    n: usize,
    lq: f64,
    beta: f64,
    constants: &BoundConstants,
) -> Result<(f64, bool)> {
    for (name, v) in [("L", l_nq), ("K", k_nq), ("beta", beta)] {
        ensure(v.is_finite() && v > 0.0, || format!("{name} must be positive, got {v}"))?;
    }
    ensure(n >= 1, || "n must be >= 1".into())?;
    ensure_finite_nonneg("log q", lq)?;
    let nf = n as f64;
    let bound = constants.k1_clt * (l_nq * l_nq * lq.powi(7) / nf).powf(1.0 / 6.0)
        + constants.c_beta_b_clt * k_nq.powi(6) * lq / nf;
    // log q = 0 makes the left side infinite; treated as satisfied.
    let condition_ok = lq == 0.0 || {
        let lhs = (nf * l_nq / lq).cbrt() / (8.0 * constants.k2_clt * k_nq);
        let rhs = 1f64.max(2f64.powf(1.0 / beta - 1.0))
            * (lq.powf(1.0 / beta) + (6.0 / beta).powf(1.0 / beta) + 1.0);
        lhs >= rhs
    };
    Ok((bound, condition_ok))
}

/// Gaussian multiplier bootstrap of the centered max statistic.
pub fn multiplier_bootstrap(
    w: &DataMatrix,
    draws: usize,
    levels: &[f64],
    reference: Option<&DMatrix<f64>>,
    stream: &RngStream,
) -> Result<BootstrapResult> {
    let n = w.n();
    ensure(n >= 2, || format!("bootstrap needs n >= 2, got {n}"))?;
    ensure(draws >= 1, || "draws must be >= 1".into())?;
    let mut centered = w.values.clone();
    for mut col in centered.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    centered /= (n as f64).sqrt();
    let mut rng = stream.rng();
    let e = DMatrix::<f64>::from_fn(draws, n, |_, _| rng.sample(StandardNormal));
    let s = e * &centered;
    let values: Vec<f64> = s.row_iter().map(|r| r.max()).collect();
    let qs = stats::quantiles(&values, levels)?;
    let sigma_star = centered_cov(w)?;
    let delta_star = match reference {
        Some(r) => Some(max_elementwise_error(&sigma_star, r)?),
        None => None,
    };
    Ok(BootstrapResult {
        quantiles: levels.iter().copied().zip(qs).collect(),
        draws,
        sigma_star,
        delta_star,
        values,
    })
}

/// `C·(Δ*)^{1/3}·(log p)^{2/3}`.
pub fn bootstrap_error_bound(delta_star: f64, p: usize, c: f64) -> Result<f64> {
    ensure_finite_nonneg("delta_star", delta_star)?;
    ensure(p >= 2, || format!("p must be >= 2, got {p}"))?;
    ensure(c.is_finite() && c > 0.0, || format!("C must be positive, got {c}"))?;
    Ok(c * delta_star.cbrt() * (p as f64).ln().powf(2.0 / 3.0))
}

/// One coverage replication: the centered max statistic, the bootstrap
/// quantile at `nominal` and whether the first is at or below the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageDraw {
    pub statistic: f64,
    pub quantile: f64,
    pub covered: bool,
    /// `Δ*` against the population covariance when the law provides one.
    pub delta_star: Option<f64>,
}

/// Data come from `stream.child(0)`, multipliers from `stream.child(1)`.
pub fn coverage_replication(
    law: &VectorLaw,
    n: usize,
    nominal: f64,
    draws: usize,
    stream: &RngStream,
) -> Result<CoverageDraw> {
    ensure(nominal > 0.0 && nominal < 1.0, || format!("nominal level must lie in (0, 1), got {nominal}"))?;
    let mu = law.population_mean().ok_or_else(|| Error::Argument("law has no finite mean".into()))?;
    let mut w = draw_matrix(law, n, &stream.child(0))?;
    for (j, m) in mu.iter().enumerate() {
        if *m != 0.0 {
            w.values.column_mut(j).add_scalar_mut(-m);
        }
    }
    let statistic = max_statistic(&w);
    let reference = law.population_cov();
    let boot = multiplier_bootstrap(&w, draws, &[nominal], reference.as_ref(), &stream.child(1))?;
    let quantile = boot.quantiles[0].1;
    Ok(CoverageDraw { statistic, quantile, covered: statistic <= quantile, delta_star: boot.delta_star })
}

/// Fraction of replications whose centered max statistic falls at or below
/// the bootstrap quantile at `nominal`. Replication `r` uses `stream.child(r)`.
pub fn coverage_experiment(
    law: &VectorLaw,
    n: usize,
    nominal: f64,
    reps: usize,
    draws: usize,
    stream: &RngStream,
) -> Result<Coverage> {
    ensure(reps >= 100, || format!("coverage needs reps >= 100, got {reps}"))?;
    let mut covered = 0usize;
    for r in 0..reps {
        if coverage_replication(law, n, nominal, draws, &stream.child(r as u64))?.covered {
            covered += 1;
        }
    }
    Ok(coverage_summary(covered, reps))
}

pub fn coverage_summary(covered: usize, reps: usize) -> Coverage {
    let coverage = covered as f64 / reps as f64;
    Coverage { coverage, mc_se: stats::binomial_se(coverage, reps), reps }
}
