//! `paging-lab`: experiment driver for the sequential/concurrent paging
//! laboratory. Each subcommand writes CSV files plus gnuplot scripts into the
//! output directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, ExperimentConfig};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "paging-lab",
    version,
    about = "Sequential vs concurrent paging: Erlang-C curves, RBF load prediction, swap strategy and simulation checks",
    after_help = "Exit codes:\n  0  success\n  1  runtime error\n  2  invalid arguments or configuration\n  3  validation found a disagreeing cell"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; omitted fields take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Wait probability and mean system time of both schemes over the arrival-rate grid, plus the crossover.
    Curves(Common),
    /// Train one predictor per traffic type and score it on held-out data.
    Train(Common),
    /// Compare pure sequential, pure concurrent and intelligent paging on each traffic type.
    Strategy(Common),
    /// Check the analytic formulas against the discrete-event simulator.
    Validate(Common),
}

fn load(common: &Common) -> anyhow::Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| ConfigError(format!("output directory {}: {e}", cfg.output_dir.display())))?;
    let out = cfg.output_dir.clone();
    Ok((cfg, out))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Curves(c) => {
            let (cfg, out) = load(&c)?;
            commands::curves(&cfg, &out)?;
        }
        Command::Train(c) => {
            let (cfg, out) = load(&c)?;
            commands::train_cmd(&cfg, &out)?;
        }
        Command::Strategy(c) => {
            let (cfg, out) = load(&c)?;
            commands::strategy_cmd(&cfg, &out)?;
        }
        Command::Validate(c) => {
            let (cfg, out) = load(&c)?;
            return commands::validate_cmd(&cfg, &out);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
