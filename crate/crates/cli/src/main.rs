//! `tdsv`: score, evaluate and simulate text-dependent speaker verification trials.
//!
//! Errors go to stderr as one line, `error[<Class>]: <detail>`, with a
//! nonzero exit status.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tdsv::SubsetMode;

#[derive(Parser)]
#[command(name = "tdsv", version, about = "Text-dependent speaker verification scoring toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score trials: CER phrase gate, then cosine of fused embeddings.
    Score(ScoreArgs),
    /// Report normalized min-DCF and EER for a labeled score file.
    Evaluate(EvaluateArgs),
    /// Write DET operating points for a labeled score file.
    Det(DetArgs),
    /// Generate a seeded synthetic dataset.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    trials: PathBuf,
    #[arg(long)]
    enrollmap: PathBuf,
    #[arg(long)]
    phrases: PathBuf,
    #[arg(long)]
    transcripts: PathBuf,
    /// `<space>=<path>`, repeatable; the order declares the fusion order.
    #[arg(long = "embeddings", value_name = "SPACE=PATH", required = true)]
    embeddings: Vec<String>,
    #[arg(long, default_value_t = 0.3)]
    cer_threshold: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    punitive_score: f64,
    /// Score every trial by cosine regardless of its transcript.
    #[arg(long)]
    no_gate: bool,
    #[command(flatten)]
    integrity: Integrity,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(multiple = false)]
struct Integrity {
    /// Abort on the first dangling reference (default).
    #[arg(long)]
    strict: bool,
    /// Skip trials with dangling references and report them.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct LabeledScoresArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Trial list supplying labels by trial id.
    #[arg(long)]
    trials: Option<PathBuf>,
    /// all, tc-vs-tw, tc-vs-ic, tc-vs-iw, or a label list such as TC,IW
    #[arg(long, default_value = "all")]
    subset: SubsetMode,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: LabeledScoresArgs,
    #[arg(long, default_value_t = 10.0)]
    c_miss: f64,
    #[arg(long, default_value_t = 1.0)]
    c_fa: f64,
    #[arg(long, default_value_t = 0.01)]
    p_target: f64,
    /// Also write the report as JSON.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Also write the key=value report to a file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetArgs {
    #[command(flatten)]
    input: LabeledScoresArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    n_speakers: usize,
    #[arg(long, default_value_t = 10)]
    n_phrases: usize,
    /// `<name>:<dim>:<sigma>`, repeatable. Defaults to spk_a:64:0.05 and spk_b:64:0.05.
    #[arg(long = "space", value_name = "NAME:DIM:SIGMA")]
    spaces: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials_per_type: usize,
    #[arg(long, default_value_t = 0.05)]
    error_rate_correct: f64,
    #[arg(long, default_value_t = 0.05)]
    error_rate_wrong: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(a) => commands::score(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Det(a) => commands::det(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.class(), e);
            ExitCode::FAILURE
        }
    }
}
