//! `affinv`: command-line driver for the affine-invariance toolkit.
//!
//! Exit codes: 0 pass, 1 a property check failed, 2 unrecognized kernel,
//! 64 usage error, 65 input-contract violation, 66 unreadable input,
//! 74 report write failure.

mod args;
mod commands;
mod error;
mod input;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, OutputArgs};
use commands::Outcome;
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match run(&cli.command) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("affinv: {e}");
            e.exit_code()
        }
    }
}

fn run(command: &Command) -> Result<u8, CliError> {
    let (outcome, out) = match command {
        Command::Check(a) => (commands::check(a)?, &a.out),
        Command::Kernel(a) => (commands::kernel(a)?, &a.out),
        Command::Mcd(a) => (commands::mcd(a)?, &a.out),
        Command::Decompose(a) => (commands::decompose(a)?, &a.out),
        Command::Commutator(a) => (commands::commutator(a)?, &a.out),
    };
    emit(&outcome, out)?;
    Ok(outcome.status.code())
}

fn emit(outcome: &Outcome, out: &OutputArgs) -> Result<(), CliError> {
    match &out.output {
        Some(path) => std::fs::write(path, &outcome.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.body.as_bytes())?;
            stdout.flush()?;
        }
    }
    if !outcome.diagnostics.is_empty() {
        eprint!("{}", outcome.diagnostics);
    }
    Ok(())
}
