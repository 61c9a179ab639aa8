//! Command-line front end: argument definitions, report rendering and one
//! function per subcommand.

pub mod args;
pub mod commands;
pub mod render;

use std::fs;

use benchcmp::Error;

use args::{Cli, Command};

/// Exit status for a failed command.
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. } | Error::Undefined(_) | Error::Io(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the command and returns the text it would print.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let (format, digits) = (cli.common.format, cli.common.digits);
    if digits == 0 || digits > 17 {
        return Err(CliError::input("--digits must be between 1 and 17"));
    }
    let report = match &cli.command {
        Command::Rank(a) => commands::rank(a)?,
        Command::Nhst(a) => commands::nhst(a)?,
        Command::Threshold(a) => commands::threshold(&a.input)?,
        Command::Bayes(a) => commands::bayes(a)?,
        Command::Ppc(a) => commands::ppc(a)?,
        Command::Timing(a) => commands::timing(a)?,
        Command::Synth(a) => return commands::synth(a),
    };
    Ok(report.render(format, digits))
}

/// Runs the command inside a thread pool of the requested size and writes
/// the output to `--out` or stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::internal(e.to_string()))?;
    let text = pool.install(|| execute(cli))?;
    match &cli.common.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
