//! Flat `key=value` experiment configs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use subweibull_core::orlicz::constants::ABSTRACT_CONSTANTS;
use subweibull_core::orlicz::BoundConstants;

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    Norms,
    Tailcheck,
    Covariance,
    Rip,
    Re,
    Lasso,
    Clt,
    Bootstrap,
}

pub const EXPERIMENTS: [ExperimentKind; 8] = [
    ExperimentKind::Norms,
    ExperimentKind::Tailcheck,
    ExperimentKind::Covariance,
    ExperimentKind::Rip,
    ExperimentKind::Re,
    ExperimentKind::Lasso,
    ExperimentKind::Clt,
    ExperimentKind::Bootstrap,
];

const COMMON: &[&str] = &["experiment", "seed", "reps", "out", "workers"];

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Norms => "norms",
            ExperimentKind::Tailcheck => "tailcheck",
            ExperimentKind::Covariance => "covariance",
            ExperimentKind::Rip => "rip",
            ExperimentKind::Re => "re",
            ExperimentKind::Lasso => "lasso",
            ExperimentKind::Clt => "clt",
            ExperimentKind::Bootstrap => "bootstrap",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        EXPERIMENTS.iter().copied().find(|e| e.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::Norms => "empirical psi/GBO/phi norms and moment growth against closed forms",
            ExperimentKind::Tailcheck => "max-of-averages exceedance frequency against the explicit threshold",
            ExperimentKind::Covariance => "elementwise gram/covariance error and its high-probability threshold",
            ExperimentKind::Rip => "sparse operator-norm error of the gram matrix",
            ExperimentKind::Re => "restricted eigenvalue verdicts checked against a cone oracle",
            ExperimentKind::Lasso => "Lasso error, cone membership and deterministic bound",
            ExperimentKind::Clt => "Kolmogorov distance between data and Gaussian max statistics",
            ExperimentKind::Bootstrap => "multiplier bootstrap coverage of the max statistic",
        }
    }

    /// Keys this experiment accepts besides the common ones and `const.*`.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Norms => &["law", "alpha", "n", "l", "r_max"],
            ExperimentKind::Tailcheck => &["law", "alpha", "n", "q", "t", "k_factor", "pilot_n"],
            ExperimentKind::Covariance => &["law", "rho", "alpha", "n", "p", "t"],
            ExperimentKind::Rip => &["law", "rho", "alpha", "n", "p", "k", "net_cap"],
            ExperimentKind::Re => &["law", "rho", "alpha", "n", "p", "k", "trials", "delta", "net_cap"],
            ExperimentKind::Lasso => &[
                "law", "alpha", "n", "p", "k", "noise", "noise_shape", "lambda_policy", "lambda", "tol", "max_iter",
                "trials",
            ],
            ExperimentKind::Clt => &["law", "rho", "alpha", "n", "q", "inner_reps", "grid", "pilot_n"],
            ExperimentKind::Bootstrap => &["law", "rho", "alpha", "n", "q", "nominal", "draws"],
        }
    }

    /// Grid keys in scan order.
    pub fn grid_keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Norms => &["alpha", "l", "n"],
            ExperimentKind::Tailcheck => &["alpha", "q", "n", "t"],
            ExperimentKind::Covariance => &["alpha", "p", "t", "n"],
            ExperimentKind::Rip | ExperimentKind::Re => &["alpha", "p", "k", "n"],
            ExperimentKind::Lasso => &["alpha", "p", "k", "n"],
            ExperimentKind::Clt | ExperimentKind::Bootstrap => &["alpha", "q", "n"],
        }
    }

    /// Whether a log-log rate in `n` is asserted for the primary metric.
    pub fn asserts_rate(self) -> bool {
        matches!(self, ExperimentKind::Covariance | ExperimentKind::Rip | ExperimentKind::Lasso | ExperimentKind::Clt)
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    GridCount,
    GridReal,
    Count,
    Real,
    Unit,
    Seed,
    Path,
    Word(&'static [&'static str]),
}

const LAWS: &[&str] = &["weibull", "centered_weibull", "gaussian", "exponential", "copula", "identical"];

fn kind_of(key: &str) -> Option<Kind> {
    Some(match key {
        "n" | "p" | "k" | "q" => Kind::GridCount,
        "alpha" | "t" | "l" => Kind::GridReal,
        "reps" | "workers" | "pilot_n" | "net_cap" | "trials" | "max_iter" | "inner_reps" | "grid" | "draws" => {
            Kind::Count
        }
        "k_factor" | "noise_shape" | "lambda" | "tol" | "delta" | "r_max" => Kind::Real,
        "rho" | "nominal" => Kind::Unit,
        "seed" => Kind::Seed,
        "out" => Kind::Path,
        "law" => Kind::Word(LAWS),
        "noise" => Kind::Word(&["gaussian", "pareto", "student_t"]),
        "lambda_policy" => Kind::Word(&["oracle", "theory", "fixed"]),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub reps: Option<usize>,
    pub grids: BTreeMap<String, Vec<f64>>,
    pub counts: BTreeMap<String, usize>,
    pub reals: BTreeMap<String, f64>,
    pub words: BTreeMap<String, String>,
    pub constant_overrides: Vec<(String, f64)>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Accepted lines in file order, for the manifest.
    pub echo: Vec<(String, String)>,
}

fn line_err(line: usize, message: impl Into<String>) -> SimError {
    SimError::ConfigLine { line, message: message.into() }
}

fn parse_count(line: usize, key: &str, raw: &str) -> SimResult<usize> {
    let v: usize = raw.trim().parse().map_err(|_| line_err(line, format!("key `{key}`: `{raw}` is not a count")))?;
    if v == 0 {
        return Err(line_err(line, format!("key `{key}` must be positive")));
    }
    Ok(v)
}

fn parse_real(line: usize, key: &str, raw: &str) -> SimResult<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| line_err(line, format!("key `{key}`: `{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(line_err(line, format!("key `{key}` must be finite")));
    }
    Ok(v)
}

/// Parse a config; `seed_override` (the `--seed` flag) replaces or supplies the seed.
pub fn parse_config_with(text: &str, seed_override: Option<u64>) -> SimResult<ExperimentConfig> {
    let mut experiment = None;
    let mut seed = None;
    let mut raw: Vec<(usize, String, String)> = Vec::new();
    let mut seen = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| line_err(lineno, format!("expected key=value, got `{content}`")))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key.is_empty() || value.is_empty() {
            return Err(line_err(lineno, format!("empty key or value in `{content}`")));
        }
        if let Some(prev) = seen.insert(key.clone(), lineno) {
            return Err(line_err(lineno, format!("key `{key}` repeats line {prev}")));
        }
        match key.as_str() {
            "experiment" => {
                experiment = Some(ExperimentKind::from_name(&value).ok_or_else(|| {
                    let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name()).collect();
                    line_err(lineno, format!("key `experiment`: unknown experiment `{value}` (one of {})", names.join(", ")))
                })?)
            }
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|_| line_err(lineno, format!("key `seed`: `{value}` is not a u64")))?)
            }
            _ => {}
        }
        raw.push((lineno, key, value));
    }
    let experiment = experiment.ok_or_else(|| SimError::Config("missing required key `experiment`".into()))?;
    let seed = seed_override.or(seed).ok_or_else(|| SimError::Config("missing required key `seed`".into()))?;

    let mut cfg = ExperimentConfig {
        experiment,
        seed,
        reps: None,
        grids: BTreeMap::new(),
        counts: BTreeMap::new(),
        reals: BTreeMap::new(),
        words: BTreeMap::new(),
        constant_overrides: Vec::new(),
        out: None,
        workers: None,
        echo: Vec::new(),
    };
    let mut probe = BoundConstants::default();
    for (lineno, key, value) in raw {
        cfg.echo.push((key.clone(), value.clone()));
        if let Some(name) = key.strip_prefix("const.") {
            if !ABSTRACT_CONSTANTS.contains(&name) {
                return Err(line_err(lineno, format!("unknown constant `{name}`")));
            }
            let v = parse_real(lineno, &key, &value)?;
            probe.set(name, v).map_err(|e| line_err(lineno, e.to_string()))?;
            cfg.constant_overrides.push((name.to_string(), v));
            continue;
        }
        if key == "experiment" || key == "seed" {
            continue;
        }
        let Some(kind) = kind_of(&key) else {
            return Err(line_err(lineno, format!("unknown key `{key}`")));
        };
        if !COMMON.contains(&key.as_str()) && !experiment.keys().contains(&key.as_str()) {
            return Err(line_err(lineno, format!("key `{key}` is not used by experiment {}", experiment.name())));
        }
        match kind {
            Kind::GridCount => {
                let vals = value
                    .split(',')
                    .map(|v| parse_count(lineno, &key, v).map(|c| c as f64))
                    .collect::<SimResult<Vec<_>>>()?;
                cfg.grids.insert(key, vals);
            }
            Kind::GridReal => {
                let vals = value.split(',').map(|v| parse_real(lineno, &key, v)).collect::<SimResult<Vec<_>>>()?;
                if let Some(bad) = vals.iter().find(|v| **v <= 0.0) {
                    return Err(line_err(lineno, format!("key `{key}`: grid value {bad} is not positive")));
                }
                cfg.grids.insert(key, vals);
            }
            Kind::Count => {
                let v = parse_count(lineno, &key, &value)?;
                match key.as_str() {
                    "reps" => cfg.reps = Some(v),
                    "workers" => cfg.workers = Some(v),
                    _ => {
                        cfg.counts.insert(key, v);
                    }
                }
            }
            Kind::Real => {
                let v = parse_real(lineno, &key, &value)?;
                if v <= 0.0 {
                    return Err(line_err(lineno, format!("key `{key}` must be positive, got {v}")));
                }
                cfg.reals.insert(key, v);
            }
            Kind::Unit => {
                let v = parse_real(lineno, &key, &value)?;
                let ok = if key == "rho" { (0.0..1.0).contains(&v) } else { v > 0.0 && v < 1.0 };
                if !ok {
                    return Err(line_err(lineno, format!("key `{key}` out of range, got {v}")));
                }
                cfg.reals.insert(key, v);
            }
            Kind::Word(options) => {
                if !options.contains(&value.as_str()) {
                    return Err(line_err(lineno, format!("key `{key}`: `{value}` is not one of {}", options.join(", "))));
                }
                cfg.words.insert(key, value);
            }
            Kind::Path => cfg.out = Some(PathBuf::from(value)),
            Kind::Seed => unreachable!("seed handled above"),
        }
    }
    Ok(cfg)
}

pub fn parse_config(text: &str) -> SimResult<ExperimentConfig> {
    parse_config_with(text, None)
}

impl ExperimentConfig {
    pub fn grid(&self, key: &str, default: &[f64]) -> Vec<f64> {
        self.grids.get(key).cloned().unwrap_or_else(|| default.to_vec())
    }

    pub fn count(&self, key: &str, default: usize) -> usize {
        self.counts.get(key).copied().unwrap_or(default)
    }

    pub fn real(&self, key: &str, default: f64) -> f64 {
        self.reals.get(key).copied().unwrap_or(default)
    }

    pub fn word<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.words.get(key).map(String::as_str).unwrap_or(default)
    }

    pub fn reps_or(&self, default: usize) -> usize {
        self.reps.unwrap_or(default)
    }

    /// Constants for `alpha` with the configured overrides applied.
    pub fn constants(&self, alpha: f64) -> SimResult<BoundConstants> {
        let mut c = BoundConstants::new(alpha)?;
        for (name, v) in &self.constant_overrides {
            c.set(name, *v)?;
        }
        Ok(c)
    }

    /// Number of grid points (product of the scanned list lengths).
    pub fn grid_size(&self) -> usize {
        self.experiment.grid_keys().iter().map(|k| self.grids.get(*k).map_or(1, Vec::len)).product()
    }
}
