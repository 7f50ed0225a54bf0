use subweibull_core::covariance::{
    cone_min_oracle, gram, quarter_net, re_check, upsilon_estimate, upsilon_iid, xi_bound, ReReport, RsConvexityParams,
};
use subweibull_core::linalg::min_eigenvalue;
use subweibull_core::samplers::{draw_matrix, VectorLaw};

use super::covariance::law_scales;
use super::rip::sparse_norm;
use super::*;

const METRICS: [&str; 9] = [
    "lambda_min_hat",
    "xi_theory",
    "xi_realized",
    "cone_oracle",
    "rsc_floor",
    "theory_ok",
    "realized_ok",
    "sample_ok",
    "gamma_sample",
];

/// Population inputs shared by every replication of one `(alpha, p, k)`.
pub(crate) struct Population {
    pub lambda_min: f64,
    pub upsilon: f64,
    pub k_np: f64,
}

pub(crate) fn population(cfg: &ExperimentConfig, law: &VectorLaw, alpha: f64, k: usize, tag: u64) -> SimResult<Population> {
    let sigma = law.population_gram().ok_or_else(|| config_error("law has no population gram"))?;
    let lambda_min = min_eigenvalue(&sigma)?;
    let k_np = law_scales(cfg, law, alpha, tag)?.k_np;
    let iid = matches!(law, VectorLaw::IidCoordinates { .. });
    let upsilon = match (iid, law.coordinate_law().and_then(|m| upsilon_iid(m, k))) {
        (true, Some(u)) => u,
        _ => {
            let stream = setup_stream(cfg, 1000 + tag);
            let x = draw_matrix(law, cfg.count("pilot_n", 20_000), &stream.child(0))?;
            let net = quarter_net(k, law.p(), cfg.count("net_cap", 2_000), &stream.child(1))?;
            upsilon_estimate(&x, &net)?
        }
    };
    Ok(Population { lambda_min, upsilon, k_np })
}

/// Sample-route verdict: RE for `Σ̂` itself with `γ = λ_min(Σ̂)/2`, counted
/// only when `γ > 0`.
pub(crate) fn sample_verdict(sigma_hat: &nalgebra::DMatrix<f64>, k: usize) -> SimResult<ReReport> {
    let mut rep = re_check(sigma_hat, 0.0, k)?;
    rep.satisfied = rep.satisfied && rep.gamma_n > 0.0;
    Ok(rep)
}

pub fn run(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentOutput> {
    let kind = cfg.experiment;
    let grid = Grid::new(cfg, &[("alpha", &[0.5, 1.0, 2.0]), ("p", &[20.0]), ("k", &[2.0]), ("n", &[200.0, 1000.0, 5000.0])]);
    let reps = cfg.reps_or(20);
    let trials = cfg.count("trials", 10_000);
    let delta = cfg.real("delta", 3.0);
    if delta < 1.0 {
        return Err(config_error(format!("delta must be >= 1, got {delta}")));
    }
    let mut pop_keys: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..grid.len() {
        let key = (grid.get(i, "alpha"), grid.count(i, "p"), grid.count(i, "k"));
        if key.2 > key.1 {
            return Err(config_error(format!("k = {} exceeds p = {}", key.2, key.1)));
        }
        if !pop_keys.contains(&key) {
            pop_keys.push(key);
        }
    }
    let pops = pop_keys
        .iter()
        .enumerate()
        .map(|(t, &(alpha, p, k))| population(cfg, &vector_law(cfg, alpha, p), alpha, k, t as u64))
        .collect::<SimResult<Vec<_>>>()?;

    let cells = par_map(workers, grid.len() * reps, |c| {
        let (i, r) = (c / reps, c % reps);
        let (alpha, p, k, n) = (grid.get(i, "alpha"), grid.count(i, "p"), grid.count(i, "k"), grid.count(i, "n"));
        let pop = &pops[pop_keys.iter().position(|x| *x == (alpha, p, k)).expect("population key")];
        let law = vector_law(cfg, alpha, p);
        let sigma = law.population_gram().ok_or_else(|| config_error("law has no population gram"))?;
        let c_alpha = cfg.constants(alpha)?.c_alpha_cov;
        let params = RsConvexityParams { upsilon: pop.upsilon, k_np: pop.k_np, n, p, k, alpha, c_alpha };
        let xi_theory = xi_bound(&params, true)?;

        let stream = cell_stream(cfg, i, r);
        let x = draw_matrix(&law, n, &stream.child(0))?;
        let sigma_hat = gram(&x);
        let d = &sigma_hat - &sigma;
        let xi_realized = sparse_norm(cfg, &d, k, &stream.child(1))?.certified_upper();
        let support: Vec<usize> = (0..k).collect();
        let oracle = cone_min_oracle(&sigma_hat, &support, delta, trials, &stream.child(2))?;

        let theory = re_check(&sigma, xi_theory, k)?;
        let realized = xi_realized.map(|xi| re_check(&sigma, xi, k)).transpose()?;
        let sample = sample_verdict(&sigma_hat, k)?;
        let rsc_floor = xi_realized
            .map(|xi| pop.lambda_min - 27.0 * xi - 54.0 * xi * (1.0 + delta).powi(2))
            .unwrap_or(f64::NAN);

        let mut violations = Vec::new();
        let slack = 1e-12 * sigma_hat.amax().max(1.0);
        for (route, rep) in [("theory", Some(theory)), ("realized", realized), ("sample", Some(sample))] {
            if let Some(rep) = rep {
                if rep.satisfied && oracle < rep.gamma_n - slack {
                    violations.push(invariant(
                        "re_consistency",
                        format!("alpha={alpha} p={p} k={k} n={n} rep={r} route={route}: oracle {oracle} < gamma {}", rep.gamma_n),
                    ));
                }
            }
        }
        if oracle < rsc_floor - slack {
            violations.push(invariant(
                "rsc_floor",
                format!("alpha={alpha} p={p} k={k} n={n} rep={r}: oracle {oracle} < floor {rsc_floor}"),
            ));
        }
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        Ok(RepRow {
            metrics: vec![
                sample.lambda_min,
                xi_theory,
                xi_realized.unwrap_or(f64::NAN),
                oracle,
                rsc_floor,
                flag(theory.satisfied),
                realized.map_or(f64::NAN, |x| flag(x.satisfied)),
                flag(sample.satisfied),
                sample.gamma_n,
            ],
            extra: vec![Cell::Num(pop.lambda_min), Cell::Num(pop.upsilon), Cell::Num(pop.k_np)],
            violations,
        })
    })?;
    let RepTable { results, values, violations } =
        rep_table(cfg, &grid, reps, &METRICS, &["lambda_min", "upsilon", "k_np"], cells)?;
    let summary = summarize(SummarySpec {
        kind,
        law: cfg.word("law", default_law(kind)),
        grid: &grid,
        reps,
        metrics: &METRICS,
        values: &values,
        rate: None,
        cfg,
    })?;
    Ok(ExperimentOutput {
        results,
        summary,
        primary: "median_cone_oracle",
        violations,
        constants: record_constants(cfg, &grid)?,
    })
}
