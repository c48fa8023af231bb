//! `guiltevo` command-line driver.
//!
//! Settings come from built-in defaults, an optional TOML config file and
//! command-line flags, in increasing order of precedence. Every command
//! validates its settings and computes its results before writing
//! anything, so a failed run leaves the output directory untouched.

pub mod commands;
pub mod config;
mod error;
pub mod manifest;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::Settings;
pub use error::CliError;
pub use output::OutputSet;

use error::config_err;

#[derive(Debug, Parser)]
#[command(
    name = "guiltevo",
    version,
    about = "Evolution of guilt-prone strategies in iterated dilemmas"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommandArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Well-mixed fixation probabilities, stationary distribution and
    /// risk-dominance conditions.
    Analytic(CommandArgs),
    /// Replicated agent-based runs on one topology.
    Simulate(CommandArgs),
    /// Aggregate results over a grid of b, gamma and gamma_s.
    Sweep(CommandArgs),
    /// Neighbourhood composition snapshots on a structured population.
    Cluster(CommandArgs),
    /// Pairwise payoff and cooperation matrices.
    Matrix(CommandArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analytic(_) => "analytic",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Cluster(_) => "cluster",
            Command::Matrix(_) => "matrix",
        }
    }

    pub fn args(&self) -> &CommandArgs {
        match self {
            Command::Analytic(a)
            | Command::Simulate(a)
            | Command::Sweep(a)
            | Command::Cluster(a)
            | Command::Matrix(a) => a,
        }
    }
}

pub const DEFAULT_OUT: &str = "out";

pub fn run(cli: Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let args = cli.command.args();
    let settings = match &args.config {
        Some(path) => config::load_file(path, name)?.overlay(args.settings.clone()),
        None => args.settings.clone(),
    };
    let out = compute(name, &settings)?;
    out.write_all(&settings.out.clone().unwrap_or_else(|| DEFAULT_OUT.into()))
}

/// Runs `command` with fully merged settings and returns its files without
/// writing them. Work runs on a pool of `settings.jobs` threads.
pub fn compute(command: &str, settings: &Settings) -> Result<OutputSet, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs.unwrap_or(0))
        .build()
        .map_err(|e| {
            config_err(format!(
                "cannot start {} worker threads: {e}",
                settings.jobs.unwrap_or(0)
            ))
        })?;
    pool.install(|| match command {
        "analytic" => commands::analytic(settings),
        "simulate" => commands::simulate(settings),
        "sweep" => commands::sweep(settings),
        "cluster" => commands::cluster(settings),
        "matrix" => commands::matrix(settings),
        other => Err(config_err(format!("unknown command '{other}'"))),
    })
}
