use subweibull_core::hdclt::{bootstrap_error_bound, coverage_replication, coverage_summary};
use subweibull_core::stats::median;

use super::*;

pub fn run(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentOutput> {
    let kind = cfg.experiment;
    let grid = Grid::new(cfg, &[("alpha", &[1.0]), ("q", &[100.0]), ("n", &[500.0])]);
    let reps = cfg.reps_or(200);
    if reps < 100 {
        return Err(config_error(format!("bootstrap coverage needs reps >= 100, got {reps}")));
    }
    let nominal = cfg.real("nominal", 0.9);
    let draws = cfg.count("draws", 500);
    let law_name = cfg.word("law", default_law(kind));

    let cells = par_map(workers, grid.len() * reps, |c| {
        let (i, r) = (c / reps, c % reps);
        let (alpha, q, n) = (grid.get(i, "alpha"), grid.count(i, "q"), grid.count(i, "n"));
        let law = vector_law(cfg, alpha, q);
        Ok(coverage_replication(&law, n, nominal, draws, &cell_stream(cfg, i, r))?)
    })?;

    let mut header = vec!["schema".to_string(), "law".into()];
    header.extend(grid.keys.iter().map(|k| k.to_string()));
    header.extend(["rep", "nominal", "statistic", "quantile", "covered", "delta_star", "error_bound", "constants"].map(String::from));
    let mut results = CsvTable::new(header);
    let mut header = vec!["schema".to_string(), "law".into()];
    header.extend(grid.keys.iter().map(|k| k.to_string()));
    header.extend(
        ["reps", "draws", "nominal", "coverage", "mc_se", "coverage_gap", "median_delta_star", "median_error_bound", "constants"]
            .map(String::from),
    );
    let mut summary = CsvTable::new(header);
    for i in 0..grid.len() {
        let q = grid.count(i, "q");
        let echo = constants_echo(cfg, grid.get(i, "alpha"))?;
        let mut covered = 0usize;
        let mut deltas = Vec::with_capacity(reps);
        let mut bounds = Vec::with_capacity(reps);
        for (r, d) in cells[i * reps..(i + 1) * reps].iter().enumerate() {
            let delta_star = d.delta_star.unwrap_or(f64::NAN);
            let bound = if q >= 2 && delta_star.is_finite() { bootstrap_error_bound(delta_star, q, 1.0)? } else { f64::NAN };
            covered += usize::from(d.covered);
            deltas.push(delta_star);
            bounds.push(bound);
            let mut row = vec![schema(kind, "results"), Cell::from(law_name)];
            row.extend(grid.cells(i));
            row.extend([
                Cell::from(r),
                Cell::Num(nominal),
                Cell::Num(d.statistic),
                Cell::Num(d.quantile),
                Cell::from(d.covered),
                Cell::Num(delta_star),
                Cell::Num(bound),
                Cell::from(echo.clone()),
            ]);
            results.push(row);
        }
        let cov = coverage_summary(covered, reps);
        let finite_median = |v: &[f64]| -> SimResult<f64> {
            let f: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
            Ok(if f.is_empty() { f64::NAN } else { median(&f)? })
        };
        let mut row = vec![schema(kind, "summary"), Cell::from(law_name)];
        row.extend(grid.cells(i));
        row.extend([
            Cell::from(reps),
            Cell::from(draws),
            Cell::Num(nominal),
            Cell::Num(cov.coverage),
            Cell::Num(cov.mc_se),
            Cell::Num(cov.coverage - nominal),
            Cell::Num(finite_median(&deltas)?),
            Cell::Num(finite_median(&bounds)?),
            Cell::from(echo),
        ]);
        summary.push(row);
    }
    Ok(ExperimentOutput {
        results,
        summary,
        primary: "coverage",
        violations: Vec::new(),
        constants: record_constants(cfg, &grid)?,
    })
}
