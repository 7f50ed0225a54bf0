use subweibull_core::hdclt::{data_max_sample, gaussian_analog_sample, hdclt_bound, rho_rectangle_proxy};
use subweibull_core::orlicz::{empirical_norm, OrliczSpec, NORM_REL_TOL};
use subweibull_core::samplers::draw_many;
use subweibull_core::stats::median;

use super::*;

const METRICS: [&str; 4] = ["proxy", "median_data", "median_gaussian", "hdclt_bound"];

pub fn run(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentOutput> {
    let kind = cfg.experiment;
    let grid = Grid::new(cfg, &[("alpha", &[1.0]), ("q", &[50.0]), ("n", &[250.0, 1000.0, 4000.0])]);
    let reps = cfg.reps_or(20);
    let inner = cfg.count("inner_reps", 20_000);
    let thresholds = cfg.count("grid", 200);
    let pilot_n = cfg.count("pilot_n", 200_000);

    // Third absolute moment and ψ_α norm of one centered coordinate.
    let mut pilots: Vec<(f64, f64, f64)> = Vec::new();
    for (a, alpha) in grid.values("alpha").into_iter().enumerate() {
        let law = scalar_law(cfg, alpha);
        let mean = law.mean().ok_or_else(|| config_error("law has no finite mean"))?;
        let x: Vec<f64> = draw_many(&law, pilot_n, &setup_stream(cfg, a as u64))?.iter().map(|v| v - mean).collect();
        let l = x.iter().map(|v| v.abs().powi(3)).sum::<f64>() / x.len() as f64;
        let k = empirical_norm(&x, &OrliczSpec::psi(alpha)?, NORM_REL_TOL)?.value;
        pilots.push((alpha, l, k));
    }

    let cells = par_map(workers, grid.len() * reps, |c| {
        let (i, r) = (c / reps, c % reps);
        let (alpha, q, n) = (grid.get(i, "alpha"), grid.count(i, "q"), grid.count(i, "n"));
        let law = vector_law(cfg, alpha, q);
        let sigma = law.population_cov().ok_or_else(|| config_error("law has no population covariance"))?;
        let stream = cell_stream(cfg, i, r);
        let data = data_max_sample(&law, n, inner, &stream.child(0))?;
        let gauss = gaussian_analog_sample(&sigma, n, inner, &stream.child(1))?;
        let proxy = rho_rectangle_proxy(&data, &gauss, thresholds)?;
        let &(_, l, k) = pilots.iter().find(|p| p.0 == alpha).expect("alpha pilot");
        let (bound, condition_ok) = hdclt_bound(l, k, n, q, alpha, 1.0, &cfg.constants(alpha)?)?;
        Ok(RepRow {
            metrics: vec![proxy, median(&data.values)?, median(&gauss.values)?, bound],
            extra: vec![Cell::from(condition_ok), Cell::Num(l), Cell::Num(k)],
            violations: Vec::new(),
        })
    })?;
    let RepTable { results, values, violations } =
        rep_table(cfg, &grid, reps, &METRICS, &["condition_ok", "l_nq", "k_nq"], cells)?;
    let summary = summarize(SummarySpec {
        kind,
        law: cfg.word("law", default_law(kind)),
        grid: &grid,
        reps,
        metrics: &METRICS,
        values: &values,
        rate: Some("proxy"),
        cfg,
    })?;
    Ok(ExperimentOutput {
        results,
        summary,
        primary: "median_proxy",
        violations,
        constants: record_constants(cfg, &grid)?,
    })
}
