mod commands;
mod config;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use aurec::eval::EvalError;
use aurec::AurecError;
use clap::{Parser, Subcommand};
use ctbn::inference::InferenceError;
use ctbn::io::IoError;
use ctbn::learning::LearnError;
use ctbn::model::ModelError;
use ctbn::trajectory::TrajectoryError;

use crate::config::RunConfig;

/// Invalid invocation: missing inputs, inconsistent file sets.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "ctbn", version, about = "Continuous time Bayesian networks and AU recognition from phoneme segments")]
struct Cli {
    /// TOML file supplying defaults for flags not given on the command line
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trajectories from a model
    Sample(commands::sample::Args),
    /// Fit a model to complete trajectories or to labeled AU utterances
    Learn(commands::learn::Args),
    /// Recognize AUs from phoneme segment files
    Recognize(commands::recognize::Args),
    /// Posterior marginals of hidden nodes given a trajectory file as evidence
    Infer(commands::infer::Args),
    /// Score predicted AU labels against groundtruth
    Eval(commands::evaluate::EvalArgs),
    /// ROC curves of predicted AU probabilities
    Roc(commands::evaluate::RocArgs),
    /// Convert a Praat TextGrid tier to a segment file
    Convert(commands::convert::Args),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Sample(a) => commands::sample::run(a, &config),
        Command::Learn(a) => commands::learn::run(a, &config),
        Command::Recognize(a) => commands::recognize::run(a, &config),
        Command::Infer(a) => commands::infer::run(a, &config),
        Command::Eval(a) => commands::evaluate::run_eval(a, &config),
        Command::Roc(a) => commands::evaluate::run_roc(a, &config),
        Command::Convert(a) => commands::convert::run(a, &config),
    }
}

/// Error class and source line, from the innermost error that knows them.
fn classify(err: &anyhow::Error) -> (&'static str, Option<usize>) {
    let mut kind = "error";
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<IoError>() {
            match e {
                IoError::Json { line: l, .. } | IoError::Parse { line: l, .. } => {
                    return ("parse", Some(*l));
                }
                _ => kind = "model",
            }
        } else if let Some(e) = cause.downcast_ref::<AurecError>() {
            match e {
                AurecError::Parse { line: l, .. }
                | AurecError::UnknownPhoneme { line: l, .. }
                | AurecError::OverlappingSegments { line: l }
                | AurecError::NegativeDuration { line: l } => return ("parse", Some(*l)),
                AurecError::LengthMismatch(_) | AurecError::Trajectory(_) => kind = "data",
                AurecError::Inference(_) => kind = "inference",
                AurecError::Learn(_) => kind = "learn",
                _ => kind = "model",
            }
        } else if cause.is::<toml::de::Error>() {
            kind = "config";
        } else if cause.is::<Usage>() {
            kind = "usage";
        } else if cause.is::<InferenceError>() {
            kind = "inference";
        } else if cause.is::<LearnError>() {
            kind = "learn";
        } else if cause.is::<EvalError>() {
            kind = "eval";
        } else if cause.is::<ModelError>() {
            kind = "model";
        } else if cause.is::<TrajectoryError>() {
            kind = "data";
        } else if cause.is::<std::io::Error>() {
            kind = "io";
        }
    }
    (kind, None)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, line) = classify(&err);
            let message = format!("{err:#}");
            match line {
                Some(l) => eprintln!("error kind={kind} line={l} message=\"{}\"", escape(&message)),
                None => eprintln!("error kind={kind} message=\"{}\"", escape(&message)),
            }
            eprintln!("ctbn: {message}");
            ExitCode::FAILURE
        }
    }
}
