//! `sde` — render fine-tuning samples, parse model outputs, score runs.
//!
//! Exit codes: 0 success, 1 validation error (bad arguments or bad input
//! data), 2 i/o error.

mod commands;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use sde_core::Error;

#[derive(Parser)]
#[command(
    name = "sde",
    version,
    about = "Sample-design toolkit: fixtures, rendering, parsing, scoring and reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus from a schema and label distribution.
    Fixtures(commands::FixturesArgs),
    /// Render a corpus into training samples (or emit a full run from a manifest).
    Render(commands::RenderArgs),
    /// Generate single-option ablation grid manifests around a baseline.
    Grid(commands::GridArgs),
    /// Parse raw model outputs into structured predictions.
    Parse(commands::ParseArgs),
    /// Score a prediction file against gold records.
    Score(commands::ScoreArgs),
    /// Summarize scored runs: baseline deltas and average rankings.
    Report(commands::ReportArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Fixtures(args) => commands::fixtures(args),
        Command::Render(args) => commands::render(args),
        Command::Grid(args) => commands::grid(args),
        Command::Parse(args) => commands::parse(args),
        Command::Score(args) => commands::score(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        1
    } else {
        2
    }
}
