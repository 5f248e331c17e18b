//! `quic`: generate synthetic problems, solve them, and benchmark solvers.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | converged (or `generate`/`bench` finished) |
//! | 1 | I/O error |
//! | 2 | iteration or time budget exhausted before convergence |
//! | 3 | line search failed |
//! | 4 | bad input: unparsable file, invalid flag or parameter |
//! | 5 | stalled at the round-off floor before reaching the tolerance |
//!
//! In cases 2 and 5 the solution, trace and manifest are still written.

mod args;
mod bench;
mod generate;
mod manifest;
mod solve;

use std::process::ExitCode;

use clap::Parser;
use quic_core::QuicError;

use args::{Cli, Command};

pub const EXIT_IO: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_LINE_SEARCH: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_STALLED: u8 = 5;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Solve(a) => solve::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(q) = cause.downcast_ref::<QuicError>() {
            return match q {
                QuicError::Io(_) => EXIT_IO,
                QuicError::LineSearchFailed { .. } => EXIT_LINE_SEARCH,
                _ => EXIT_INPUT,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_INPUT
}
