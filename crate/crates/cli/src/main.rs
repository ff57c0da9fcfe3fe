//! `qot`: distances between states, experiment CSVs and the inequality suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 solver
//! non-convergence.

mod args;
mod commands;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Input(String),
    NotConverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Input(m) | Failure::NotConverged(m) => m,
        }
    }
}

impl From<qot::metrics::MetricsError> for Failure {
    fn from(e: qot::metrics::MetricsError) -> Self {
        match e {
            // an unconverged solve is the only way to get here from valid input
            qot::metrics::MetricsError::Negative(_) => Failure::NotConverged(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<qot::states::StateError> for Failure {
    fn from(e: qot::states::StateError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Distance(a) => commands::distance(a),
        Command::Selfdist(a) => commands::selfdist(a),
        Command::Scatter(a) => commands::scatter(a),
        Command::Dynamics(a) => commands::dynamics(a),
        Command::Verify(a) => verify::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qot: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
