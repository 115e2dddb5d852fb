// SPDX-License-Identifier: Apache-2.0

//! `electrodiffusion`: solve slab problems, build Bäcklund ladders, sample
//! reservoir profiles and run the property suites.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 Newton
//! non-convergence, 3 verification failure.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod output;
mod reservoir;
mod sequence;
mod solve;
mod verify;

#[derive(Debug, Parser)]
#[command(name = "electrodiffusion", version, about = "Steady two-ion electrodiffusion across a liquid junction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the slab boundary-value problem
    Solve(solve::SolveArgs),
    /// Build a Bäcklund sequence from a seed and scan it for positivity
    Sequence(sequence::SequenceArgs),
    /// Run the property suites and print a pass/fail table
    Verify(verify::VerifyArgs),
    /// Sample a single reservoir profile
    Reservoir(reservoir::ReservoirArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NonConvergence,
    VerifyFailed,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::NonConvergence => 2,
            Outcome::VerifyFailed => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve::run(a),
        Command::Sequence(a) => sequence::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Reservoir(a) => reservoir::run(a),
    };
    match outcome {
        Ok(o) => ExitCode::from(o.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
