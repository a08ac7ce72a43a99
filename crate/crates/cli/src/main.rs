//! `posveri` command-line driver.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage or input error,
//! 3 numerical non-convergence.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Violation(String),
    Io(String),
    Core(posveri::Error),
}

impl From<posveri::Error> for CliError {
    fn from(e: posveri::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(posveri::Error::NonConvergence(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Violation(m) => write!(f, "property violation: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// Caps rayon's pool at `POSVERI_THREADS` when set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("POSVERI_THREADS") else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("POSVERI_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Honest(a) => commands::honest(&cli.run, a),
        Command::Gardenhose(a) => commands::gardenhose(&cli.run, a),
        Command::Reduce(a) => commands::reduce(&cli.run, a),
        Command::Invariants(a) => commands::invariants(&cli.run, a),
        Command::Bounds(a) => commands::bounds(&cli.run, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("posveri: {e}");
            ExitCode::from(e.code())
        }
    }
}
