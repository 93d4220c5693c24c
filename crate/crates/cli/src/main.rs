//! `qfluct`: run the relation suites, measure packets through Gaussian
//! devices and sweep device widths.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 scenario outside the closed
//! form's domain, 4 a check did not pass.

mod config;
mod measure;
mod output;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CliError, RunArgs};

#[derive(Debug, Parser)]
#[command(name = "qfluct", version, about = "Numerical checks of quantum fluctuation relations and measurement channels")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the relation catalog, or a single state and relation.
    Verify(verify::VerifyArgs),
    /// Measure one packet (or the oscillator ground state) through a Gaussian device.
    Measure(measure::MeasureArgs),
    /// Sweep the device widths for a fixed packet.
    Scan(measure::ScanArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfluct: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.run.resolve()?;
    match cli.command {
        Command::Verify(args) => verify::cmd_verify(&args, &config),
        Command::Measure(args) => measure::cmd_measure(&args, &config),
        Command::Scan(args) => measure::cmd_scan(&args, &config),
    }
}
