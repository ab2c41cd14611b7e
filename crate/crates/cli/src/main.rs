//! `fhtnet` command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or input error,
//! 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
    pub fn failed(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
    pub fn numeric(message: impl Into<String>) -> CliError {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fhtnet",
    version,
    about = "Fast Hough Transform tools and vanishing-point networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    /// Configuration file of key=value lines
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Extra key=value settings applied after the file
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the Hough transform (or its transpose) to a PGM image
    Fht {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        transposed: bool,
        #[arg(long, default_value = "horizontal-down")]
        quadrant: String,
        /// Zero-pad non-square or non-power-of-two inputs
        #[arg(long)]
        pad_to_pow2: bool,
        /// Also write the result as little-endian f64 values
        #[arg(long, value_name = "PATH")]
        raw: Option<PathBuf>,
    },
    /// Check the transform matrix identities against the explicit oracle
    Verify {
        #[arg(long, default_value_t = 5)]
        p_max: u32,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Generate a synthetic dataset into data_dir
    Synth(RunArgs),
    /// Train a network on data_dir and write model (and loss_csv)
    Train(RunArgs),
    /// Evaluate a model on test_dir and write report
    Eval(RunArgs),
    /// Evaluate under growing blur squares and write report
    Sweep(RunArgs),
    /// Predict the vanishing point of one image
    Infer {
        image: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Write every layer's channels as PGM images into this directory
        #[arg(long, value_name = "DIR")]
        dump_intermediate: Option<PathBuf>,
        /// Channels to dump (default: all)
        #[arg(long, value_delimiter = ',')]
        channels: Vec<usize>,
    },
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("FHTNET_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::usage(format!(
                "FHTNET_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Fht {
            input,
            output,
            transposed,
            quadrant,
            pad_to_pow2,
            raw,
        } => commands::fht(
            &input,
            &output,
            transposed,
            &quadrant,
            pad_to_pow2,
            raw.as_deref(),
        ),
        Command::Verify {
            p_max,
            inject_fault,
        } => commands::verify(p_max, inject_fault),
        Command::Synth(a) => commands::synth(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a, false),
        Command::Sweep(a) => commands::eval(&a, true),
        Command::Infer {
            image,
            run,
            dump_intermediate,
            channels,
        } => commands::infer(&image, &run, dump_intermediate.as_deref(), &channels),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
