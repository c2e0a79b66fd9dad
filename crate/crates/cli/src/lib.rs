//! Reproducible command-line experiments on top of `asymqkd-core`.
//!
//! Each subcommand is a pure function of its arguments (and seed) returning
//! the full text output, which keeps golden-file tests simple.

pub mod args;
mod commands;
pub mod fig2;
pub mod output;

use anyhow::Result;

pub use args::{Cli, Command};

/// Runs a parsed command and returns what it would print.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Rates(a) => commands::rates(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::SweepFig1(a) => commands::sweep_fig1_cmd(a),
        Command::SweepFig2(a) => commands::sweep_fig2_cmd(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}
