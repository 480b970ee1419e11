//! `collapse-sim`: runs the measurement thought experiments and writes
//! JSON reports and CSV trial tables.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 configuration error,
//! 3 I/O error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, RunConfig, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<collapse_core::Error> for CliError {
    fn from(e: collapse_core::Error) -> Self {
        use collapse_core::Error as E;
        match e {
            E::ConfigError(_)
            | E::ReservoirParity(_)
            | E::DegenerateAxis
            | E::NotPure(_)
            | E::CalibrationError(_)
            | E::UnknownFactor(_)
            | E::LabelCollision(_) => CliError::Config(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "collapse-sim",
    version,
    about = "Spin measurement under collapse and unitary schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// x, z, x measurement chain with an angular-momentum ledger
    Conservation(Settings),
    /// Forward run, backward unitary reconstruction and record check
    Anamnesis(Settings),
    /// Special-state grid search and kick-angle statistics
    SpecialSearch(Settings),
    /// Born weights against sampled outcome frequencies over input tilts
    BornCheck(Settings),
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (command, flags) = match cli.command {
        Sub::Conservation(s) => (Command::Conservation, s),
        Sub::Anamnesis(s) => (Command::Anamnesis, s),
        Sub::SpecialSearch(s) => (Command::SpecialSearch, s),
        Sub::BornCheck(s) => (Command::BornCheck, s),
    };
    let cfg = RunConfig::resolve(command, &Settings::merged(flags)?)?;
    if !cfg.out.is_dir() {
        return Err(CliError::Io(format!(
            "output directory {} does not exist",
            cfg.out.display()
        )));
    }
    match command {
        Command::Conservation => commands::conservation(&cfg),
        Command::Anamnesis => commands::anamnesis(&cfg),
        Command::SpecialSearch => commands::special_search(&cfg),
        Command::BornCheck => commands::born_check(&cfg),
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
    match run(cli) {
        Ok(verdict) => {
            println!("{verdict}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("collapse-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
