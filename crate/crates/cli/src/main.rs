//! Command-line harness for entropy-guided measurement design experiments.
//!
//! Every command is deterministic given its flags; CSV outputs start with a
//! `#` provenance line recording the full configuration.

mod commands;
mod common;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "infosense",
    about = "Design, analyze and test entropy-optimal linear measurement schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the per-projection capacity diagram and a sensor allocation.
    Capacity(commands::capacity::CapacityArgs),
    /// Compare random vs. principal-component projection entropy curves.
    Compare(commands::compare::CompareArgs),
    /// Measure an image under one or more schemes and reconstruct it.
    Sense(commands::sense::SenseArgs),
    /// Two-dimensional mixture demo: entropy and decoding error per angle.
    Toy(commands::toy::ToyArgs),
    /// Estimate the GG shape parameter of an image from its Haar details.
    EstimateAlpha(commands::estimate::EstimateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity(args) => commands::capacity::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::Sense(args) => commands::sense::run(args),
        Command::Toy(args) => commands::toy::run(args),
        Command::EstimateAlpha(args) => commands::estimate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Output directory shared by all commands.
pub(crate) fn ensure_out_dir(dir: &PathBuf) -> infosense::Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
