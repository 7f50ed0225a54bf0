use subweibull_core::orlicz::constants::{c_moment_lower, c_moment_upper};
use subweibull_core::orlicz::{
    empirical_norm, gbo_moment_norm, moment_grid_converged, OrliczSpec, DEFAULT_R_MAX, DEFAULT_R_STEP, NORM_REL_TOL,
};
use subweibull_core::samplers::draw_many;

use super::*;

const METRICS: [&str; 6] = ["psi_norm", "gbo_norm", "phi_norm", "moment_norm", "analytic_psi", "rel_error"];

pub fn run(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentOutput> {
    let kind = cfg.experiment;
    let grid = Grid::new(cfg, &[("alpha", &[0.5, 1.0, 2.0]), ("l", &[1.0]), ("n", &[10_000.0])]);
    let reps = cfg.reps_or(10);
    let r_max = cfg.real("r_max", DEFAULT_R_MAX);
    let law_name = cfg.word("law", default_law(kind));

    let cells = par_map(workers, grid.len() * reps, |c| {
        let (i, r) = (c / reps, c % reps);
        let (alpha, l, n) = (grid.get(i, "alpha"), grid.get(i, "l"), grid.count(i, "n"));
        let law = scalar_law(cfg, alpha);
        let x = draw_many(&law, n, &cell_stream(cfg, i, r))?;
        let psi = empirical_norm(&x, &OrliczSpec::psi(alpha)?, NORM_REL_TOL)?.value;
        let gbo = empirical_norm(&x, &OrliczSpec::gbo(alpha, l)?, NORM_REL_TOL)?.value;
        let phi = empirical_norm(&x, &OrliczSpec::gbo_phi(alpha, l)?, NORM_REL_TOL)?.value;
        let moment = gbo_moment_norm(&x, alpha, l, r_max, DEFAULT_R_STEP)?;
        let converged = moment_grid_converged(|rm| gbo_moment_norm(&x, alpha, l, rm, DEFAULT_R_STEP), r_max)?;
        let analytic = law.psi_norm(alpha).unwrap_or(f64::NAN);
        let rel = (psi / analytic - 1.0).abs();

        let mut violations = Vec::new();
        let slack = 1.0 + 4.0 * NORM_REL_TOL;
        if !(gbo <= phi * slack && phi <= 2.0 * gbo * slack) {
            violations.push(invariant("phi_sandwich", format!("alpha={alpha} l={l} n={n} rep={r}: gbo={gbo} phi={phi}")));
        }
        if c_moment_lower(alpha) * moment > gbo * slack {
            violations.push(invariant(
                "moment_sandwich_lower",
                format!("alpha={alpha} l={l} n={n} rep={r}: C_lower*moment={} > gbo={gbo}", c_moment_lower(alpha) * moment),
            ));
        }
        if converged && gbo > c_moment_upper(alpha) * moment * slack {
            violations.push(invariant(
                "moment_sandwich_upper",
                format!("alpha={alpha} l={l} n={n} rep={r}: gbo={gbo} > C_upper*moment={}", c_moment_upper(alpha) * moment),
            ));
        }
        Ok(RepRow { metrics: vec![psi, gbo, phi, moment, analytic, rel], extra: vec![Cell::from(converged)], violations })
    })?;
    let RepTable { results, values, violations } =
        rep_table(cfg, &grid, reps, &METRICS, &["moment_grid_converged"], cells)?;
    let summary = summarize(SummarySpec {
        kind,
        law: law_name,
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
        primary: "median_psi_norm",
        violations,
        constants: record_constants(cfg, &grid)?,
    })
}
