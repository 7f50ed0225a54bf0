use nalgebra::DVector;

use subweibull_core::covariance::{gram, re_check, upsilon_iid, xi_bound, RsConvexityParams};
use subweibull_core::lasso::{cone_membership, deterministic_error_bound, solve, LambdaPolicy, LassoProblem};
use subweibull_core::orlicz::{empirical_norm, OrliczSpec, NORM_REL_TOL};
use subweibull_core::samplers::{draw_many, make_regression, ScalarLaw, VectorLaw};
use subweibull_core::tailbounds::product_norm;

use super::re::sample_verdict;
use super::*;

const METRICS: [&str; 10] = [
    "l2_error",
    "l1_error",
    "lambda",
    "lambda_ratio",
    "kkt_residual",
    "lambda_min_hat",
    "det_bound",
    "cone_ok",
    "bound_ok",
    "re_theory_ok",
];

/// Unit-variance design marginal.
fn design_marginal(cfg: &ExperimentConfig, alpha: f64) -> SimResult<ScalarLaw> {
    let law = scalar_law(cfg, alpha);
    let m2 = law.second_moment().ok_or_else(|| config_error("design law has no second moment"))?;
    Ok(law.scaled(1.0 / m2.sqrt()))
}

fn design_law(cfg: &ExperimentConfig, alpha: f64, p: usize) -> SimResult<VectorLaw> {
    let marginal = design_marginal(cfg, alpha)?;
    match cfg.word("law", default_law(cfg.experiment)) {
        "copula" => Ok(VectorLaw::GaussianCopula { rho: cfg.real("rho", 0.5), marginal, p }),
        "identical" | "exponential" | "centered_weibull" => {
            Err(config_error("lasso needs a symmetric design with independent or copula coordinates"))
        }
        _ => Ok(VectorLaw::IidCoordinates { law: marginal, p }),
    }
}

/// Unit-variance noise law and the moment order it is known to have.
fn noise_law(cfg: &ExperimentConfig) -> SimResult<ScalarLaw> {
    match cfg.word("noise", "gaussian") {
        "pareto" => {
            let shape = cfg.real("noise_shape", 4.5);
            if shape <= 2.0 {
                return Err(config_error(format!("pareto noise needs noise_shape > 2, got {shape}")));
            }
            Ok(ScalarLaw::Pareto { shape, scale: ((shape - 2.0) / shape).sqrt() })
        }
        "student_t" => {
            let dof = cfg.real("noise_shape", 5.0);
            if dof <= 2.0 {
                return Err(config_error(format!("student_t noise needs noise_shape > 2, got {dof}")));
            }
            Ok(ScalarLaw::StudentT { dof }.scaled(((dof - 2.0) / dof).sqrt()))
        }
        _ => Ok(ScalarLaw::Gaussian { sigma: 1.0 }),
    }
}

fn psi_norm_or_pilot(cfg: &ExperimentConfig, law: &ScalarLaw, alpha: f64, tag: u64) -> SimResult<f64> {
    if let Some(v) = law.psi_norm(alpha) {
        return Ok(v);
    }
    let x = draw_many(law, cfg.count("pilot_n", 200_000), &setup_stream(cfg, tag))?;
    Ok(empirical_norm(&x, &OrliczSpec::psi(alpha)?, NORM_REL_TOL)?.value)
}

fn policy(cfg: &ExperimentConfig, alpha: f64, k_design: f64, eps: &DVector<f64>) -> SimResult<LambdaPolicy> {
    let constants = cfg.constants(alpha)?;
    Ok(match cfg.word("lambda_policy", "oracle") {
        "fixed" => LambdaPolicy::Fixed(
            *cfg.reals.get("lambda").ok_or_else(|| config_error("lambda_policy=fixed needs key `lambda`"))?,
        ),
        "theory" => match cfg.word("noise", "gaussian") {
            "gaussian" => {
                let (gamma, k_np) = product_norm(&[k_design, (8.0f64 / 3.0).sqrt()], &[alpha, 2.0])?;
                LambdaPolicy::TheorySubWeibull { sigma_np: 1.0, k_np, gamma, constants }
            }
            "pareto" => {
                let noise = noise_law(cfg)?;
                let m4 = noise.fourth_moment().ok_or_else(|| config_error("theory lambda needs noise_shape > 4"))?;
                LambdaPolicy::TheoryPoly {
                    sigma_np: 1.0,
                    k_np: k_design,
                    k_eps_r: m4.powf(0.25),
                    alpha,
                    r: 4.0,
                    l: 1.0,
                    constants,
                }
            }
            other => return Err(config_error(format!("lambda_policy=theory is not available for {other} noise"))),
        },
        _ => LambdaPolicy::EmpiricalOracle(eps.clone()),
    })
}

pub fn run(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentOutput> {
    let kind = cfg.experiment;
    let grid = Grid::new(cfg, &[("alpha", &[1.0]), ("p", &[200.0]), ("k", &[5.0]), ("n", &[500.0, 1000.0, 2000.0])]);
    let reps = cfg.reps_or(20);
    let tol = cfg.real("tol", 1e-8);
    let max_iter = cfg.count("max_iter", 10_000);
    let noise = noise_law(cfg)?;
    let mut k_design = Vec::new();
    for (a, alpha) in grid.values("alpha").into_iter().enumerate() {
        k_design.push((alpha, psi_norm_or_pilot(cfg, &design_marginal(cfg, alpha)?, alpha, a as u64)?));
    }
    for i in 0..grid.len() {
        if grid.count(i, "k") > grid.count(i, "p") {
            return Err(config_error(format!("k = {} exceeds p = {}", grid.count(i, "k"), grid.count(i, "p"))));
        }
    }

    let cells = par_map(workers, grid.len() * reps, |c| {
        let (i, r) = (c / reps, c % reps);
        let (alpha, p, k, n) = (grid.get(i, "alpha"), grid.count(i, "p"), grid.count(i, "k"), grid.count(i, "n"));
        let design = design_law(cfg, alpha, p)?;
        let k_x = k_design.iter().find(|(a, _)| *a == alpha).expect("alpha pilot").1;
        let beta0 = DVector::from_fn(p, |j, _| if j < k { 1.0 } else { 0.0 });
        let support: Vec<usize> = (0..k).collect();
        let reg = make_regression(&design, &beta0, &noise, n, None, &cell_stream(cfg, i, r))?;
        let problem = LassoProblem::new(reg.x, reg.y)?;
        let lambda = policy(cfg, alpha, k_x, &reg.eps)?.resolve(&problem)?;
        let fit = solve(&problem, lambda, tol, max_iter)?;
        let nu = &fit.beta - &reg.beta0;
        let l2 = nu.norm();
        let l1 = nu.lp_norm(1);
        let noise_level = 2.0 * problem.correlations(&reg.eps).amax();
        let dominates = lambda >= noise_level;

        let sigma_hat = gram(&problem.x);
        let sample = sample_verdict(&sigma_hat, k)?;
        let det_bound = if sample.satisfied { deterministic_error_bound(k, lambda, sample.gamma_n)? } else { f64::NAN };

        let re_theory_ok = match design.coordinate_law().and_then(|m| upsilon_iid(m, k)) {
            Some(upsilon) if matches!(design, VectorLaw::IidCoordinates { .. }) && alpha <= 2.0 => {
                let c_alpha = cfg.constants(alpha)?.c_alpha_cov;
                let xi = xi_bound(&RsConvexityParams { upsilon, k_np: k_x, n, p, k, alpha, c_alpha }, true)?;
                let sigma = design.population_gram().ok_or_else(|| config_error("design has no population gram"))?;
                if re_check(&sigma, xi, k)?.satisfied { 1.0 } else { 0.0 }
            }
            _ => f64::NAN,
        };

        let mut violations = Vec::new();
        let here = || format!("alpha={alpha} p={p} k={k} n={n} rep={r}");
        if fit.converged && fit.kkt_residual > 10.0 * tol {
            violations.push(invariant("kkt_certificate", format!("{}: residual {}", here(), fit.kkt_residual)));
        }
        let cone_ok = cone_membership(&nu, &support, &reg.beta0);
        if dominates && !cone_ok {
            violations.push(invariant("cone_membership", format!("{}: lambda {lambda}", here())));
        }
        let bound_ok = if dominates && sample.satisfied {
            let ok = l2 <= det_bound;
            if !ok {
                violations.push(invariant("deterministic_bound", format!("{}: error {l2} > {det_bound}", here())));
            }
            if ok { 1.0 } else { 0.0 }
        } else {
            f64::NAN
        };
        Ok(RepRow {
            metrics: vec![
                l2,
                l1,
                lambda,
                lambda / noise_level,
                fit.kkt_residual,
                sample.lambda_min,
                det_bound,
                if cone_ok { 1.0 } else { 0.0 },
                bound_ok,
                re_theory_ok,
            ],
            extra: vec![Cell::from(fit.iterations), Cell::from(fit.converged), Cell::from(dominates)],
            violations,
        })
    })?;
    let RepTable { results, values, violations } =
        rep_table(cfg, &grid, reps, &METRICS, &["iterations", "converged", "lambda_dominates"], cells)?;
    let summary = summarize(SummarySpec {
        kind,
        law: cfg.word("law", default_law(kind)),
        grid: &grid,
        reps,
        metrics: &METRICS,
        values: &values,
        rate: Some("l2_error"),
        cfg,
    })?;
    Ok(ExperimentOutput {
        results,
        summary,
        primary: "median_l2_error",
        violations,
        constants: record_constants(cfg, &grid)?,
    })
}
