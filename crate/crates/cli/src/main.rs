//! `sphereuni` command line.
//!
//! Exit codes: 0 on success, 2 for usage, config or data errors, 1 for
//! internal errors.

mod commands;
mod config;
mod error;
mod io;

use std::io::IsTerminal;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use crate::commands::Command;
use crate::config::Flags;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "sphereuni",
    version,
    about = "Uniformity tests on the high-dimensional sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = cli.flags.resolve()?;
    commands::run(cli.command, settings)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_target(false)
        .with_ansi(std::io::stderr().is_terminal())
        .without_time()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("sphereuni: {e}");
            ExitCode::from(e.exit_code())
        }
        // The panic hook has already printed the message.
        Err(_) => ExitCode::from(1),
    }
}
