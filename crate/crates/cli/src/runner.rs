//! Executes one config end to end and writes its artifacts.

use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};

use crate::config::ExperimentConfig;
use crate::error::{SimError, SimResult};
use crate::experiments::{run_experiment, ExperimentOutput};
use crate::manifest::{digest_file, RunManifest};
use crate::plot::emit_plot;
use crate::table::{Cell, CsvTable};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{}", cfg.experiment.name(), cfg.seed)))
}

/// Grid keys of `summary` that take more than one value.
fn scanned_keys(cfg: &ExperimentConfig, summary: &CsvTable) -> Vec<&'static str> {
    cfg.experiment
        .grid_keys()
        .iter()
        .copied()
        .filter(|k| {
            summary.column(k).is_some_and(|j| {
                let first = summary.rows.first().map(|r| r[j].render());
                summary.rows.iter().any(|r| Some(r[j].render()) != first)
            })
        })
        .collect()
}

/// One SVG per scanned variable; the other scanned keys are held at their
/// first value.
pub fn write_plots(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path) -> SimResult<Vec<String>> {
    let scanned = scanned_keys(cfg, &out.summary);
    let mut names = Vec::new();
    for var in &scanned {
        let fixed: Vec<(usize, String)> = scanned
            .iter()
            .filter(|k| *k != var)
            .map(|k| {
                let j = out.summary.column(k).expect("scanned key present");
                (j, out.summary.rows[0][j].render())
            })
            .collect();
        let table = out.summary.filtered(|row: &[Cell]| fixed.iter().all(|(j, v)| row[*j].render() == *v));
        let loglog = *var == "n" && cfg.experiment.asserts_rate();
        let name = format!("plot_{var}.svg");
        emit_plot(&table, var, out.primary, loglog, &dir.join(&name))?;
        names.push(name);
    }
    Ok(names)
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Run `cfg`, writing `results.csv` and `summary.csv`, then plots and
/// `manifest.json` unless an invariant was violated.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> SimResult<(RunManifest, PathBuf)> {
    let started_at = now();
    let workers = opts.workers.or(cfg.workers).unwrap_or_else(default_workers);
    let dir = output_dir(cfg, opts);
    let out = run_experiment(cfg, workers)?;
    let manifest = write_outputs(cfg, &out, workers, &dir, started_at)?;
    Ok((manifest, dir))
}

/// Write the artifacts of a finished experiment into `dir`.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
    workers: usize,
    dir: &Path,
    started_at: String,
) -> SimResult<RunManifest> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    out.results.write(&dir.join("results.csv"))?;
    out.summary.write(&dir.join("summary.csv"))?;
    if let Some((name, detail)) = out.violations.first() {
        let more = out.violations.len() - 1;
        let detail = if more > 0 { format!("{detail} (and {more} more)") } else { detail.clone() };
        return Err(SimError::invariant(name.clone(), detail));
    }
    let mut files = vec!["results.csv".to_string(), "summary.csv".to_string()];
    files.extend(write_plots(cfg, out, dir)?);
    let files = files.iter().map(|f| digest_file(dir, f)).collect::<SimResult<Vec<_>>>()?;
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment.name().to_string(),
        seed: cfg.seed,
        workers,
        config: cfg.echo.clone(),
        started_at,
        finished_at: now(),
        constants: out.constants.clone(),
        files,
    };
    manifest.write(&dir.join("manifest.json"))?;
    Ok(manifest)
}
