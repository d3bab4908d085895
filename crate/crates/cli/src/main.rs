#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;

/// Overrides the worker count when `--threads` is not given.
const THREADS_ENV: &str = "LORENTZ_WALL_THREADS";

#[derive(Parser)]
#[command(
    name = "lorentz-wall",
    version,
    about = "Lorentz process with a shrinking hole in a wall"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true, default_value = "fixtures/reference.toml")]
    config: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Worker threads (default: all cores, or $LORENTZ_WALL_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Billiard trajectories with the wall.
    SimulateLorentz,
    /// Simple random walk with the crossing rule at 0.
    SimulateWalk,
    /// Quasi-reflected Brownian motion samples.
    SampleLimit,
    /// Run the acceptance suite; exits 1 if any check fails.
    Verify,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => Ok(Some(
            v.trim().parse().with_context(|| format!("{THREADS_ENV}={v}"))?,
        )),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(samples) = cli.samples {
        cfg.samples = samples;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = Some(out);
    }
    if let Some(t) = threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::SimulateLorentz => commands::simulate_lorentz(&cfg)?,
        Command::SimulateWalk => commands::simulate_walk(&cfg)?,
        Command::SampleLimit => commands::sample_limit(&cfg)?,
        Command::Verify => return commands::verify(&cfg),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
