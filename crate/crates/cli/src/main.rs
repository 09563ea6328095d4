mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// Anything that went wrong after the request was accepted; exit status 1.
    #[error("{0}")]
    Runtime(String),
}

impl From<neuroq_core::trainer::TrainError> for CliError {
    fn from(e: neuroq_core::trainer::TrainError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors and 0 for --help.
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => commands::train(a),
        Command::DumpIlp(a) => commands::dump_ilp(a),
        Command::Replay(a) => commands::replay(a),
        Command::ValidateMap(a) => commands::validate_map(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
