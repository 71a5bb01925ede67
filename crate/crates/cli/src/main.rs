//! `cmdgen` — generate text-adventure corpora, train command-set
//! generators, and score their predictions.
//!
//! Every subcommand merges a plain `key=value` manifest (via `--config`)
//! with its flags, stamps outputs with the tool version, seed, and a
//! digest of the merged settings, and is deterministic given those.
//!
//! Exit codes: 0 success, 1 bad arguments/configuration/inputs,
//! 2 filesystem errors, 3 numerically broken training.

mod eval;
mod gen;
mod predict;
mod settings;
mod stats;
mod train;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cmdgen", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a corpus of games and write dataset splits for both tasks
    Gen(gen::GenArgs),
    /// Summarize dataset splits
    Stats(stats::StatsArgs),
    /// Train an architecture and save the best checkpoint
    Train(train::TrainArgs),
    /// Decode predicted command sets from a checkpoint
    Predict(predict::PredictArgs),
    /// Score a predictions file against gold command sets
    Eval(eval::EvalArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; only real usage errors
            // should exit nonzero.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(a) => gen::run(a),
        Cmd::Stats(a) => stats::run(a),
        Cmd::Train(a) => train::run(a),
        Cmd::Predict(a) => predict::run(a),
        Cmd::Eval(a) => eval::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
