//! The `chemolab` command-line harness.
//!
//! Exit codes: 0 success, 1 a verification property failed, 2 bad
//! configuration or usage, 3 the solver diverged.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Diverged(_) => 3,
        }
    }

    /// Sorts a core error raised while integrating.
    pub fn from_solver(e: chemolab_core::Error) -> CliError {
        use chemolab_core::Error as E;
        match e {
            E::Diverged { .. } | E::StepSizeUnderflow { .. } | E::Pole { .. } => {
                CliError::Diverged(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Diverged(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "chemolab", version, about = "Delayed chemostat and logistic models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario and write its trajectory as CSV.
    Simulate { config: PathBuf },
    /// Equilibria, linearization and stability case of a scenario.
    Analyze { config: PathBuf },
    /// Verdicts and leading roots over a parameter grid.
    Sweep { config: PathBuf },
    /// Run a seeded verification suite.
    Verify {
        /// lyapunov, monotone, dichotomy, bounds, wright or all
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Where to write the TOML report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs a parsed command line, printing to stdout/stderr; returns the exit
/// code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate { config } => commands::simulate(&config),
        Command::Analyze { config } => commands::analyze(&config),
        Command::Sweep { config } => commands::sweep(&config),
        Command::Verify { suite, seed, out } => commands::verify(&suite, seed, out.as_deref()),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            outcome.code
        }
        Err(e) => {
            eprintln!("chemolab: {e}");
            e.exit_code()
        }
    }
}
