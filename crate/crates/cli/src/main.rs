//! `birdcall`: feature extraction, training, prediction and evaluation for
//! bird-audio detection.

mod commands;
mod config;
mod store;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "birdcall", version, about = "Bird audio detection with a convolutional recurrent network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decode clips and cache their features.
    Extract(commands::extract::ExtractArgs),
    /// Write the stratified fold assignment for a labeled manifest.
    Split(commands::split::SplitArgs),
    /// Train one model per fold.
    Train(commands::train::TrainArgs),
    /// Score clips with one or more checkpoints.
    Predict(commands::predict::PredictArgs),
    /// Compute AUC and error lists for a score file.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Cross-validated hyperparameter search.
    Grid(commands::grid::GridArgs),
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Extract(a) => commands::extract::run(a),
        Command::Split(a) => commands::split::run(a),
        Command::Train(a) => commands::train::run(a),
        Command::Predict(a) => commands::predict::run(a),
        Command::Evaluate(a) => commands::evaluate::run(a),
        Command::Grid(a) => commands::grid::run(a),
    }
}
