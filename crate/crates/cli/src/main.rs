//! `varmech`: command-line front end for the variational mechanics engine.
//!
//! Reports are JSON on stdout. When a command writes its CSV table to stdout
//! (no `--out`), the report goes to stderr instead.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod failure;
mod input;
mod report;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;
use failure::{Exit, Failure};
use report::RunReport;

fn run(cli: &Cli, echo: Vec<String>) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let seed = match &cli.command {
        Command::Check(a) => a.seed,
        Command::Pairing(a) => a.seed,
        _ => 0,
    };
    let report = RunReport::new(echo, seed);
    let mut outcome = match &cli.command {
        Command::Statics(a) => commands::statics(a, report),
        Command::Simulate(a) => commands::simulate(a, report),
        Command::Check(a) => commands::check(a, report),
        Command::Legendre(a) => commands::legendre_table(a, report),
        Command::Pairing(a) => commands::pairing(a, report),
    }?;
    if cli.timing {
        outcome.report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(outcome)
}

fn emit(outcome: Outcome) -> Result<Exit, Failure> {
    let report = outcome.report.to_json();
    let mut stdout = std::io::stdout().lock();
    let io_fail = |e: std::io::Error| Failure::input(format!("write failed: {e}"));
    match outcome.table {
        Some((Some(path), csv)) => {
            fs::write(&path, csv).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
            writeln!(stdout, "{report}").map_err(io_fail)?;
        }
        Some((None, csv)) => {
            stdout.write_all(csv.as_bytes()).map_err(io_fail)?;
            eprintln!("{report}");
        }
        None => writeln!(stdout, "{report}").map_err(io_fail)?,
    }
    for c in outcome.report.failed_checks() {
        let at = c.at.map(|t| format!(" at t = {t}")).unwrap_or_default();
        eprintln!("FAIL {}: residual {:e} exceeds tolerance {:e}{at}", c.name, c.residual, c.tol);
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Exit::Pass,
                _ => Exit::Usage,
            }
            .into();
        }
    };
    let echo: Vec<String> = std::iter::once("varmech".to_string()).chain(std::env::args().skip(1)).collect();
    match run(&cli, echo).and_then(emit) {
        Ok(exit) => exit.into(),
        Err(f) => {
            eprintln!("error: {f}");
            f.exit.into()
        }
    }
}
