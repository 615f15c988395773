//! Command-line front end: kernel values, constants, variance tables,
//! sampling and the self-check suite.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "affine-ensemble", version, about = "Affine-group determinantal point processes on the upper half-plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the kernel at a pair of points.
    Kernel(commands::KernelCmd),
    /// Admissibility constant, density of states and asymptotic constants.
    Constants(commands::ConstantsCmd),
    /// Number variance in discs D(i, R).
    Variance(commands::VarianceCmd),
    /// Exact samples of the discretized process.
    Sample(commands::SampleCmd),
    /// Run the self-check suite.
    Verify(commands::VerifyCmd),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl From<affine_ensemble::Error> for CliError {
    fn from(e: affine_ensemble::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kernel(c) => commands::kernel(c),
        Command::Constants(c) => commands::constants(c),
        Command::Variance(c) => commands::variance(c),
        Command::Sample(c) => commands::sample_cmd(c),
        Command::Verify(c) => commands::verify_cmd(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(m)) | Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
