//! `bnlf` command-line interface.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 model, 5 internal.

mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(CliError::Usage(String::new()).exit_code()),
            };
        }
    };
    let result = match cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Fit(a) => commands::fit_cmd(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate_cmd(a),
        Command::Infer(a) => commands::infer(a),
        Command::Influence(a) => commands::influence(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
