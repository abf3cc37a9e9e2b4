//! Command-line driver: preprocessing, training, inference, evaluation and
//! multi-seed benchmarks over LDA, WNTM and CWIBTD.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical error.

pub mod artifact;
pub mod benchmark;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use error::CliError;

use cli::{Cli, Command};
use config::FileConfig;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let config = FileConfig::load_optional(cli.config.as_deref())?;
    match &cli.command {
        Command::Prepare(a) => commands::prepare(a, &config, out).map(|_| ()),
        Command::Train(a) => commands::train(a, &config, out).map(|_| ()),
        Command::Infer(a) => commands::infer(a, out).map(|_| ()),
        Command::Benchmark(a) => commands::benchmark(a, &config, out).map(|_| ()),
        Command::Eval(a) => commands::eval(a, out),
    }
}

/// Parses `args`, runs the command, reports errors on `err`, and returns the
/// process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if informational {
                let _ = write!(out, "{text}");
                return 0;
            }
            let _ = write!(err, "{text}");
            return 1;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
