use nalgebra::DMatrix;

use subweibull_core::covariance::{gram, quarter_net, rip_exact_with_cap, rip_net, RipMethod, RipResult, DEFAULT_ENUMERATION_CAP};
use subweibull_core::samplers::{draw_matrix, RngStream};

use super::*;

const METRICS: [&str; 2] = ["rip", "certified_upper"];

fn binomial(p: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p - i) as f64 / (i + 1) as f64)
}

/// Exact sparse operator norm when the support count allows, otherwise
/// the quarter-net value over at most `net_cap` supports.
pub(crate) fn sparse_norm(cfg: &ExperimentConfig, d: &DMatrix<f64>, k: usize, stream: &RngStream) -> SimResult<RipResult> {
    let p = d.nrows();
    if binomial(p, k) <= DEFAULT_ENUMERATION_CAP as f64 {
        Ok(rip_exact_with_cap(d, k, DEFAULT_ENUMERATION_CAP)?)
    } else {
        let net = quarter_net(k, p, cfg.count("net_cap", 20_000), stream)?;
        Ok(rip_net(d, k, &net)?)
    }
}

pub fn run(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentOutput> {
    let kind = cfg.experiment;
    let grid = Grid::new(cfg, &[("alpha", &[1.0]), ("p", &[30.0]), ("k", &[2.0]), ("n", &[500.0, 1000.0, 2000.0, 4000.0])]);
    let reps = cfg.reps_or(50);
    for i in 0..grid.len() {
        if grid.count(i, "k") > grid.count(i, "p") {
            return Err(config_error(format!("k = {} exceeds p = {}", grid.count(i, "k"), grid.count(i, "p"))));
        }
    }

    let cells = par_map(workers, grid.len() * reps, |c| {
        let (i, r) = (c / reps, c % reps);
        let (alpha, p, k, n) = (grid.get(i, "alpha"), grid.count(i, "p"), grid.count(i, "k"), grid.count(i, "n"));
        let law = vector_law(cfg, alpha, p);
        let sigma = law.population_gram().ok_or_else(|| config_error("law has no population gram"))?;
        let stream = cell_stream(cfg, i, r);
        let x = draw_matrix(&law, n, &stream.child(0))?;
        let d = gram(&x) - sigma;
        let res = sparse_norm(cfg, &d, k, &stream.child(1))?;
        let method = match res.method {
            RipMethod::Exact => "exact",
            RipMethod::QuarterNet => "quarter_net",
        };
        Ok(RepRow {
            metrics: vec![res.value, res.certified_upper().unwrap_or(f64::NAN)],
            extra: vec![Cell::from(method), Cell::from(res.supports_evaluated), Cell::from(res.exhaustive)],
            violations: Vec::new(),
        })
    })?;
    let RepTable { results, values, violations } =
        rep_table(cfg, &grid, reps, &METRICS, &["method", "supports", "exhaustive"], cells)?;
    let summary = summarize(SummarySpec {
        kind,
        law: cfg.word("law", default_law(kind)),
        grid: &grid,
        reps,
        metrics: &METRICS,
        values: &values,
        rate: Some("rip"),
        cfg,
    })?;
    Ok(ExperimentOutput {
        results,
        summary,
        primary: "median_rip",
        violations,
        constants: record_constants(cfg, &grid)?,
    })
}
