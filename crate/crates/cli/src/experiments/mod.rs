//! The eight registered experiments and the grid/summary plumbing they share.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use subweibull_core::samplers::{RngStream, ScalarLaw, VectorLaw};
use subweibull_core::stats::{loglog_fit, mean, median};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{SimError, SimResult};
use crate::table::{Cell, CsvTable};

mod bootstrap;
mod clt;
mod covariance;
mod lasso;
mod norms;
mod re;
mod rip;
mod tailcheck;

/// Version tag written into every row's `schema` column.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub results: CsvTable,
    pub summary: CsvTable,
    /// Summary column plotted against each scanned variable.
    pub primary: &'static str,
    /// `(invariant, detail)` for every violation found.
    pub violations: Vec<(String, String)>,
    /// Constants echo per `alpha` actually used.
    pub constants: BTreeMap<String, String>,
}

pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentOutput> {
    match cfg.experiment {
        ExperimentKind::Norms => norms::run(cfg, workers),
        ExperimentKind::Tailcheck => tailcheck::run(cfg, workers),
        ExperimentKind::Covariance => covariance::run(cfg, workers),
        ExperimentKind::Rip => rip::run(cfg, workers),
        ExperimentKind::Re => re::run(cfg, workers),
        ExperimentKind::Lasso => lasso::run(cfg, workers),
        ExperimentKind::Clt => clt::run(cfg, workers),
        ExperimentKind::Bootstrap => bootstrap::run(cfg, workers),
    }
}

pub(crate) fn schema(kind: ExperimentKind, table: &str) -> Cell {
    Cell::Text(format!("{}/{table}/v{SCHEMA_VERSION}", kind.name()))
}

/// Cartesian product of the configured grids, last key varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub keys: Vec<&'static str>,
    pub points: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(cfg: &ExperimentConfig, defaults: &[(&'static str, &[f64])]) -> Self {
        let keys: Vec<&'static str> = cfg.experiment.grid_keys().to_vec();
        let lists: Vec<Vec<f64>> = keys
            .iter()
            .map(|k| {
                let d = defaults.iter().find(|(name, _)| name == k).map(|(_, v)| *v).unwrap_or(&[]);
                cfg.grid(k, d)
            })
            .collect();
        let mut points = vec![Vec::new()];
        for list in &lists {
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    list.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        Self { keys, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, point: usize, key: &str) -> f64 {
        let j = self.keys.iter().position(|k| *k == key).unwrap_or_else(|| panic!("grid has no key {key}"));
        self.points[point][j]
    }

    pub fn count(&self, point: usize, key: &str) -> usize {
        self.get(point, key) as usize
    }

    pub fn cells(&self, point: usize) -> Vec<Cell> {
        self.points[point].iter().map(|v| Cell::Num(*v)).collect()
    }

    /// Distinct values of `key`, in grid order.
    pub fn values(&self, key: &str) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for i in 0..self.len() {
            let v = self.get(i, key);
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

/// `f(0..count)` on up to `workers` threads, results in index order.
pub fn par_map<T: Send>(workers: usize, count: usize, f: impl Fn(usize) -> SimResult<T> + Sync) -> SimResult<Vec<T>> {
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<SimResult<T>>>> = (0..count).map(|_| Mutex::new(None)).collect();
    let threads = workers.clamp(1, count.max(1));
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let r = f(i);
                if r.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    let mut out = Vec::with_capacity(count);
    let mut first_err = None;
    for slot in slots {
        match slot.into_inner().expect("slot lock") {
            Some(Ok(v)) => out.push(v),
            Some(Err(e)) => {
                first_err.get_or_insert(e);
            }
            None => {}
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Stream for replication `rep` of grid point `point`.
pub fn cell_stream(cfg: &ExperimentConfig, point: usize, rep: usize) -> RngStream {
    RngStream::for_cell(cfg.seed, point as u64, rep as u64)
}

/// Stream for per-point setup work (pilots), disjoint from every cell stream.
pub fn setup_stream(cfg: &ExperimentConfig, tag: u64) -> RngStream {
    RngStream::new(cfg.seed, u64::MAX - tag)
}

pub fn scalar_law(cfg: &ExperimentConfig, alpha: f64) -> ScalarLaw {
    match cfg.word("law", default_law(cfg.experiment)) {
        "centered_weibull" => ScalarLaw::CenteredWeibull { alpha },
        "gaussian" => ScalarLaw::Gaussian { sigma: 1.0 },
        "exponential" => ScalarLaw::Exponential { rate: 1.0 },
        _ => ScalarLaw::SymmetricWeibull { alpha },
    }
}

pub fn vector_law(cfg: &ExperimentConfig, alpha: f64, p: usize) -> VectorLaw {
    let law = scalar_law(cfg, alpha);
    match cfg.word("law", default_law(cfg.experiment)) {
        "copula" => VectorLaw::GaussianCopula { rho: cfg.real("rho", 0.5), marginal: law, p },
        "identical" => VectorLaw::IdenticalCoordinates { law, p },
        _ => VectorLaw::IidCoordinates { law, p },
    }
}

pub fn default_law(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Clt => "centered_weibull",
        _ => "weibull",
    }
}

pub fn constants_echo(cfg: &ExperimentConfig, alpha: f64) -> SimResult<String> {
    Ok(cfg.constants(alpha)?.echo())
}

pub fn record_constants(cfg: &ExperimentConfig, grid: &Grid) -> SimResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for a in grid.values("alpha") {
        out.insert(format!("alpha={}", crate::table::format_g17(a)), constants_echo(cfg, a)?);
    }
    Ok(out)
}

/// Per-point medians and means of per-replication metrics, with the
/// log-log slope of `rate` against `n` within each series of points that
/// agree on every other grid key.
pub struct SummarySpec<'a> {
    pub kind: ExperimentKind,
    pub law: &'a str,
    pub grid: &'a Grid,
    pub reps: usize,
    pub metrics: &'a [&'a str],
    /// `values[point][metric]` over replications.
    pub values: &'a [Vec<Vec<f64>>],
    pub rate: Option<&'a str>,
    pub cfg: &'a ExperimentConfig,
}

pub fn summarize(spec: SummarySpec<'_>) -> SimResult<CsvTable> {
    let SummarySpec { kind, law, grid, reps, metrics, values, rate, cfg } = spec;
    let mut header: Vec<String> = vec!["schema".into(), "law".into()];
    header.extend(grid.keys.iter().map(|k| k.to_string()));
    header.push("reps".into());
    for m in metrics {
        header.push(format!("median_{m}"));
        header.push(format!("mean_{m}"));
    }
    if rate.is_some() {
        header.push("slope_n".into());
        header.push("slope_se_n".into());
    }
    header.push("constants".into());

    let mut medians = vec![vec![f64::NAN; metrics.len()]; grid.len()];
    for (i, per_metric) in values.iter().enumerate() {
        for (m, v) in per_metric.iter().enumerate() {
            let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
            if !finite.is_empty() {
                medians[i][m] = median(&finite)?;
            }
        }
    }
    let slopes = match rate {
        Some(name) => {
            let m = metrics.iter().position(|x| *x == name).expect("rate metric listed");
            series_slopes(grid, |i| medians[i][m])
        }
        None => vec![(f64::NAN, f64::NAN); grid.len()],
    };

    let mut t = CsvTable::new(header);
    for i in 0..grid.len() {
        let mut row = vec![schema(kind, "summary"), Cell::from(law)];
        row.extend(grid.cells(i));
        row.push(Cell::from(reps));
        for (m, v) in values[i].iter().enumerate() {
            let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
            row.push(Cell::Num(medians[i][m]));
            row.push(Cell::Num(if finite.is_empty() { f64::NAN } else { mean(&finite) }));
        }
        if rate.is_some() {
            row.push(Cell::Num(slopes[i].0));
            row.push(Cell::Num(slopes[i].1));
        }
        row.push(Cell::from(constants_echo(cfg, grid.get(i, "alpha"))?));
        t.push(row);
    }
    Ok(t)
}

/// Slope and standard error of `ln y` on `ln n` per series; NaN where the
/// series has fewer than two `n` values or a nonpositive `y`.
pub fn series_slopes(grid: &Grid, y: impl Fn(usize) -> f64) -> Vec<(f64, f64)> {
    let Some(n_idx) = grid.keys.iter().position(|k| *k == "n") else {
        return vec![(f64::NAN, f64::NAN); grid.len()];
    };
    let key_of = |i: usize| -> Vec<u64> {
        grid.points[i].iter().enumerate().filter(|(j, _)| *j != n_idx).map(|(_, v)| v.to_bits()).collect()
    };
    let mut out = vec![(f64::NAN, f64::NAN); grid.len()];
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for i in 0..grid.len() {
        groups.entry(key_of(i)).or_default().push(i);
    }
    for members in groups.values() {
        let xs: Vec<f64> = members.iter().map(|&i| grid.points[i][n_idx]).collect();
        let ys: Vec<f64> = members.iter().map(|&i| y(i)).collect();
        if let Ok(fit) = loglog_fit(&xs, &ys) {
            for &i in members {
                out[i] = (fit.slope, fit.slope_se);
            }
        }
    }
    out
}

/// Split per-cell metric rows into `values[point][metric][rep]`.
pub fn regroup(rows: &[Vec<f64>], points: usize, reps: usize, metrics: usize) -> Vec<Vec<Vec<f64>>> {
    let mut out = vec![vec![Vec::with_capacity(reps); metrics]; points];
    for (c, row) in rows.iter().enumerate() {
        let p = c / reps;
        for (m, v) in row.iter().enumerate() {
            out[p][m].push(*v);
        }
    }
    out
}

pub(crate) fn invariant(name: &str, detail: String) -> (String, String) {
    (name.to_string(), detail)
}

pub(crate) fn config_error(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

/// Output of one replication cell.
#[derive(Debug, Clone, Default)]
pub struct RepRow {
    pub metrics: Vec<f64>,
    /// Non-summarized per-replication columns.
    pub extra: Vec<Cell>,
    pub violations: Vec<(String, String)>,
}

/// One results row per replication, the metrics regrouped for
/// [`summarize`], and all violations in cell order.
pub struct RepTable {
    pub results: CsvTable,
    pub values: Vec<Vec<Vec<f64>>>,
    pub violations: Vec<(String, String)>,
}

pub fn rep_table(
    cfg: &ExperimentConfig,
    grid: &Grid,
    reps: usize,
    metrics: &[&str],
    extra: &[&str],
    cells: Vec<RepRow>,
) -> SimResult<RepTable> {
    let kind = cfg.experiment;
    let law = cfg.word("law", default_law(kind));
    let mut header = vec!["schema".to_string(), "law".into()];
    header.extend(grid.keys.iter().map(|k| k.to_string()));
    header.push("rep".into());
    header.extend(metrics.iter().map(|m| m.to_string()));
    header.extend(extra.iter().map(|m| m.to_string()));
    header.push("constants".into());
    let mut results = CsvTable::new(header);
    let mut violations = Vec::new();
    let mut rows = Vec::with_capacity(cells.len());
    for (c, cell) in cells.into_iter().enumerate() {
        let i = c / reps;
        let mut row = vec![schema(kind, "results"), Cell::from(law)];
        row.extend(grid.cells(i));
        row.push(Cell::from(c % reps));
        row.extend(cell.metrics.iter().map(|m| Cell::Num(*m)));
        row.extend(cell.extra);
        row.push(Cell::from(constants_echo(cfg, grid.get(i, "alpha"))?));
        results.push(row);
        violations.extend(cell.violations);
        rows.push(cell.metrics);
    }
    let values = regroup(&rows, grid.len(), reps, metrics.len());
    Ok(RepTable { results, values, violations })
}
