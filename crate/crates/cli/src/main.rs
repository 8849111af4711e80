//! `shapespace` command-line front end.
//!
//! Subcommands cover the whole pipeline: `synth` writes a seeded synthetic
//! corpus, `train` aligns a corpus and fits a model, `fit` registers a
//! trained model to point clouds, `evaluate` scores a corpus, and
//! `roundtrip` self-tests the wavelet transform on a grid mesh.
//!
//! Configuration is layered: built-in defaults, then the `--config` JSON
//! file, then flags, with later layers winning. Every artifact-producing run
//! echoes the fully resolved values to `<out>/resolved_config.json`, and the
//! JSON reports carry no timings or absolute paths, so identical
//! configuration and seed reproduce outputs byte for byte.
//!
//! Exit codes: 0 success, 1 invalid arguments or configuration, 2 runtime
//! failure (I/O, malformed files, degenerate inputs).

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Failures split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration: exit 1.
    Validation(String),
    /// The run itself failed: exit 2.
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<shapespace::Error> for CliError {
    fn from(e: shapespace::Error) -> Self {
        use shapespace::Error;
        match e {
            Error::InvalidArgument(_) | Error::DimensionMismatch(_) => {
                CliError::Validation(e.to_string())
            }
            Error::Io(_)
            | Error::Parse { .. }
            | Error::Degenerate(_)
            | Error::ModelFormat(_)
            | Error::Json(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "shapespace",
    version,
    about = "Statistical shape models over quad-grid surfaces"
)]
struct Cli {
    /// JSON run configuration; command-line flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus of bump-deformed cylinder patches.
    Synth(commands::synth::SynthArgs),
    /// Align a corpus and train a shape model.
    Train(commands::train::TrainArgs),
    /// Fit a trained model to one or more point clouds.
    Fit(commands::fit::FitArgs),
    /// Score a corpus: compactness, generalization, specificity, optional
    /// 10-fold cross-validation.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Check the wavelet analysis/synthesis round-trip on a grid mesh.
    Roundtrip(commands::roundtrip::RoundtripArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here as well; clap picks the stream.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--jobs: {e}")))?;
    }
    let file = config::load(cli.config.as_deref())?;
    let started = std::time::Instant::now();
    match cli.command {
        Command::Synth(args) => commands::synth::run(args, &file)?,
        Command::Train(args) => commands::train::run(args, &file)?,
        Command::Fit(args) => commands::fit::run(args, &file)?,
        Command::Evaluate(args) => commands::evaluate::run(args, &file)?,
        Command::Roundtrip(args) => commands::roundtrip::run(args)?,
    }
    // Timing goes to stderr: stdout and the JSON artifacts stay
    // reproducible.
    eprintln!("done in {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}
