//! `cr-spectra` command-line driver.
//!
//! Exit codes: 0 success, 1 violated claim or identity, 2 numerical failure,
//! 3 configuration error. Nothing is written unless the run completes.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Cli, Command, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 3,
            Self::Numerical(_) | Self::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CR_SPECTRA_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t >= 1)
        .ok_or_else(|| CliError::Config(format!("CR_SPECTRA_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    init_threads()?;
    let config = RunConfig::resolve(&cli.command)?;
    let report = match &cli.command {
        Command::Spectrum(_) => commands::spectrum(&config)?,
        Command::Verify(_) => commands::verify(&config)?,
        Command::Balance(_) => commands::balance(&config)?,
        Command::CheckIdentities(_) => commands::check_identities(&config)?,
    };
    output::emit(&report, &config)?;
    Ok(report.code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cr-spectra: {e}");
            ExitCode::from(e.code())
        }
    }
}
