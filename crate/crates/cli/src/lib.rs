//! Config-driven Monte Carlo runner for the sub-Weibull toolkit.
//!
//! A run reads a flat `key=value` config, executes one of the registered
//! experiments over its parameter grid with one RNG stream per grid point and
//! replication, and writes `results.csv`, `summary.csv`, one SVG plot per
//! scanned variable and a `manifest.json` with content digests.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod plot;
pub mod runner;
pub mod table;

pub use config::{parse_config, parse_config_with, ExperimentConfig, ExperimentKind, EXPERIMENTS};
pub use error::{SimError, SimResult};
pub use manifest::RunManifest;
pub use runner::{run, RunOptions};
pub use table::{format_g17, Cell, CsvTable};
