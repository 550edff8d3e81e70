//! Command-line front end: `solve`, `sweep`, `verify` and `oracle`.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 solver
//! failure, 3 verification failure.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("verification failed: {0} check(s) out of tolerance")]
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Solver(_) => 2,
            Self::Verification(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lelab",
    version,
    about = "Lane-Emden finite element laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for one exponent and write the JSON report.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Continue through several exponents and write one CSV row per p.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the integral identities against tolerances.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the radial solution on the unit disk.
    Oracle {
        #[arg(long = "p")]
        p: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Solve { config } => commands::cmd_solve(&RunConfig::load(config)?),
        Command::Sweep { config } => commands::cmd_sweep(&RunConfig::load(config)?),
        Command::Verify { config } => commands::cmd_verify(&RunConfig::load(config)?),
        Command::Oracle { p, points } => commands::cmd_oracle(*p, *points),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    // A panic inside the numerics is reported as a solver failure so the
    // exit-code contract holds.
    match std::panic::catch_unwind(|| execute(&cli.command)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("lelab: {e}");
            e.exit_code()
        }
        Err(_) => 2,
    }
}
