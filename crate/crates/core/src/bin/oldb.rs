//! Command-line entry point: run an experiment from a config file, run the
//! toolbox fast path, or re-emit a summary of an existing report.
//!
//! Exit codes: 0 all checks pass, 1 check failure, 2 configuration error,
//! 3 runtime failure.

use clap::{Parser, Subcommand};
use oldroyd_core::{config, experiment, report, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "oldb", about = "Pseudo-spectral Oldroyd-B solver and estimate-verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Fast path: run only the toolbox verification battery.
    Verify { config: PathBuf },
    /// Re-emit the summary of a previously written report directory.
    Report { dir: PathBuf },
}

fn main() -> ExitCode {
    oldroyd_core::threads::ensure_init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) | Error::Range(_) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: Cli) -> oldroyd_core::Result<bool> {
    match cli.command {
        Command::Run { config: path } => {
            let cfg = config::parse_config(&path)?;
            let rep = experiment::run_experiment(&cfg)?;
            print!("{}", rep.summary());
            Ok(rep.all_pass())
        }
        Command::Verify { config: path } => {
            let cfg = config::parse_config(&path)?;
            let rep = experiment::verify_toolbox(&cfg)?;
            print!("{}", rep.summary());
            Ok(rep.all_pass())
        }
        Command::Report { dir } => {
            let rep = report::load_report(&dir.join("verification.json"))?;
            print!("{}", rep.summary());
            Ok(rep.all_pass())
        }
    }
}
