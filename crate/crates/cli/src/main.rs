//! `skewlab` experiment driver.
//!
//! Exit codes: 0 when every assertion passes, 2 when one fails, 1 on
//! configuration or I/O errors.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use report::Report;

const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Parser, Debug)]
#[command(name = "skewlab", version, about = "Numerical experiments on skew-product solenoids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; defaults are used when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Cone invariance, density contraction and diameter checks
    ConeCheck,
    /// Separated-set and Brin-Katok entropy
    Entropy,
    /// Correlation decay and exponential fit
    Decay,
    /// Green-Kubo variance and CLT test
    Clt,
    /// Integrals along the perturbed family
    Stability,
    /// Correlation decay in the Markov-partition model
    DfaDecay,
    /// Samples of the maximal-entropy measure
    Sample,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ConeCheck => "cone-check",
            Command::Entropy => "entropy",
            Command::Decay => "decay",
            Command::Clt => "clt",
            Command::Stability => "stability",
            Command::DfaDecay => "dfa-decay",
            Command::Sample => "sample",
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = ExperimentConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let mut rep = Report::new(&cli.out, cli.command.name(), seed)?;
    rep.set_json("config", &cfg)?;
    match cli.command {
        Command::ConeCheck => commands::cone_check(&cfg, seed, &mut rep)?,
        Command::Entropy => commands::entropy(&cfg, seed, &mut rep)?,
        Command::Decay => commands::decay(&cfg, seed, &mut rep)?,
        Command::Clt => commands::clt(&cfg, seed, &mut rep)?,
        Command::Stability => commands::stability(&cfg, seed, &mut rep)?,
        Command::DfaDecay => commands::dfa_decay(&cfg, seed, &mut rep)?,
        Command::Sample => commands::sample(&cfg, seed, &mut rep)?,
    }
    rep.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
