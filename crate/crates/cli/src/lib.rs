//! Command-line front end: `list`, `solve`, `compare` and `certify`.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use fredholm_core::ProblemRegistry;

pub use commands::Outcome;
use config::{RunArgs, OUT_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "fredholm",
    version,
    about = "Newton-type solver for nonlinear Fredholm integral equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List registered problems.
    List,
    /// Solve one problem and write report.json and solution.csv.
    Solve(RunArgs),
    /// Run Newton-type and Picard side by side and write compare.csv.
    Compare(RunArgs),
    /// Solve, then sample the contraction of the update map and write contraction.json.
    Certify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

pub fn run(cli: &Cli, registry: &ProblemRegistry) -> Outcome {
    let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    match &cli.command {
        Command::List => commands::cmd_list(registry),
        Command::Solve(args) => commands::cmd_solve(args, registry, env_out),
        Command::Compare(args) => commands::cmd_compare(args, registry, env_out),
        Command::Certify {
            run,
            radius,
            samples,
            seed,
        } => commands::cmd_certify(run, *radius, *samples, *seed, registry, env_out),
    }
}
