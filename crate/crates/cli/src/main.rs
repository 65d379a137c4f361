//! `otto`: data for the finite-time squeezed Otto engine.

mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Emitted;
use error::CliError;
use output::Sink;

fn run(cli: Cli) -> Result<(), CliError> {
    let (jobs, out) = match &cli.command {
        Command::Fig1(a) => (a.run.jobs, a.run.out.as_deref()),
        Command::Fig2(a) => (a.run.jobs, a.run.out.as_deref()),
        Command::Fig3(a) => (a.run.jobs, a.run.out.as_deref()),
        Command::Cycle(a) => (a.run.jobs, a.run.out.as_deref()),
        Command::Verify(a) => (a.jobs, None),
    };
    let sink = Sink::open(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.map_or(0, |n| n.get()))
        .build()?;
    let Emitted { bytes, deferred } = pool.install(|| match &cli.command {
        Command::Fig1(a) => commands::fig1(a),
        Command::Fig2(a) => commands::fig2(a),
        Command::Fig3(a) => commands::fig3(a),
        Command::Cycle(a) => commands::cycle(a),
        Command::Verify(a) => commands::verify(a),
    })?;
    sink.write_all(&bytes)?;
    deferred.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
