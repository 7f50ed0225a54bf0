use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subweibull_sim::{parse_config_with, run, RunOptions, SimError, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "subweibull-sim", version, about = "Seeded Monte Carlo checks of sub-Weibull concentration bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Seed (overrides `seed` in the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the registered experiments.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in EXPERIMENTS {
                println!("{:<11} {}", e.name(), e.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, workers, seed } => {
            let result = std::fs::read_to_string(&config)
                .map_err(|e| SimError::io(&config, e))
                .and_then(|text| parse_config_with(&text, seed))
                .and_then(|cfg| {
                    if workers == Some(0) {
                        return Err(SimError::Config("--workers must be positive".into()));
                    }
                    run(&cfg, &RunOptions { out, workers })
                });
            match result {
                Ok((manifest, dir)) => {
                    println!("{} seed={} -> {}", manifest.experiment, manifest.seed, dir.display());
                    for f in &manifest.files {
                        println!("  {} {}", f.sha256, f.name);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
