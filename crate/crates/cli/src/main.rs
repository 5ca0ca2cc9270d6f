#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;

use std::fmt::Display;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_VIOLATION: u8 = 3;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn validation(e: impl Display) -> Self {
        CliError::msg(e.to_string())
    }

    pub fn msg(m: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, error: anyhow::anyhow!(m.into()) }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        CliError { code: EXIT_VALIDATION, error }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Recover(a) => commands::recover(a),
        Command::Bench(a) => commands::bench(a),
        Command::Profile(a) => commands::profile(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
