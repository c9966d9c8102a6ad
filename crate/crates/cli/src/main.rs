//! `semimix`: mean Cauchy transforms, densities, moments, simulations and CLT
//! checks for semicircular mixtures, driven by a JSON configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Failure;
use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "semimix", version, about)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for all randomness; overrides `monte_carlo.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for output CSV files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Override a config field, e.g. `--set grid.step=0.05`. Repeatable.
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Mean Cauchy transform on the grid: cauchy.csv, diagonal.csv.
    Solve,
    /// Mean Cauchy transform with its density: density.csv.
    Density,
    /// Monte-Carlo mean moments: moments.csv.
    Moments,
    /// Pooled eigenvalues of simulated matrices: eigenvalues.csv, histogram.csv.
    Simulate,
    /// Finite-size CLT moments against their limits: clt.csv.
    CltCheck,
    /// Theory against simulation: compare.csv, distances.csv.
    Compare,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config(ConfigError("--config is required".into())))?;
    let config = RunConfig::load(path, &cli.overrides, cli.seed).map_err(Failure::Config)?;
    std::fs::create_dir_all(&cli.out_dir).map_err(Failure::Io)?;
    let out = commands::Output::new(&cli.out_dir, &config);
    match cli.command {
        Command::Solve => commands::solve(&config, &out),
        Command::Density => commands::density(&config, &out),
        Command::Moments => commands::moments(&config, &out),
        Command::Simulate => commands::simulate(&config, &out),
        Command::CltCheck => commands::clt_check(&config, &out),
        Command::Compare => commands::compare(&config, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Failure::Config(ConfigError(format!("--threads: {e}")))),
        },
        None => run(&cli),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
