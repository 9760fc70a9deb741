//! `reupload` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime or data error.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::ExperimentConfig;

use crate::error::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Bad flags, unreadable or invalid configuration.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Debug, Parser)]
#[command(name = "reupload", version, about = "Photonic data re-uploading classifiers: datasets, training, analysis")]
pub struct Cli {
    /// Seed for data generation and randomized analyses.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run batch loops on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or import a dataset and write CSV + metadata.
    Dataset {
        #[command(subcommand)]
        source: DatasetCommand,
    },
    /// Train the circuit(s) described by an experiment file.
    Train {
        /// Experiment TOML file.
        config: PathBuf,
    },
    /// Learning-theory analyses.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Shot-noise Monte Carlo on a trained report.
    Noise(NoiseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScalingArg {
    MinMax,
    Raw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    PowersOfTwo,
    InversePowers,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Two concentric noisy circles.
    Circles {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = crate::data::CIRCLES_FACTOR)]
        factor: f64,
        #[arg(long, default_value_t = crate::data::CIRCLES_NOISE)]
        noise: f64,
        #[arg(long, value_enum, default_value = "min-max")]
        scaling: ScalingArg,
    },
    /// Two interleaving half circles.
    Moons {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = crate::data::MOONS_NOISE)]
        noise: f64,
        #[arg(long, value_enum, default_value = "min-max")]
        scaling: ScalingArg,
    },
    /// 3×3 T/L tetromino images: noisy training draws, noiseless test set.
    Tetromino {
        #[arg(long, default_value_t = 100)]
        n_train: usize,
    },
    /// Dyadic point set with a frequency realizing the labeling.
    WorstCase {
        /// Largest index `N` (the set has `N + 1` points).
        #[arg(long)]
        n: usize,
        /// Labels as a 0/1 string, e.g. `0110`.
        #[arg(long)]
        labels: String,
        #[arg(long, value_enum, default_value = "powers-of-two")]
        variant: VariantArg,
    },
    /// Import a CSV, optionally reduced by PCA.
    Csv {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value = "label")]
        label_column: String,
        /// Label strings for class 1 and class 2 (numeric 1/2 when omitted).
        #[arg(long, num_args = 2, value_names = ["CLASS1", "CLASS2"])]
        class_names: Option<Vec<String>>,
        #[arg(long)]
        pca: Option<usize>,
        #[arg(long, default_value_t = crate::data::DEFAULT_TRAIN_FRACTION)]
        train_fraction: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    Original,
    Compressed,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Certify the VC dimension of ℓ-arc periodic classifiers.
    Vc {
        #[arg(long, default_value_t = 3)]
        layers: usize,
    },
    /// Hessian sharpness on the dyadic worst-case set.
    Sharpness {
        #[arg(long, value_enum, default_value = "both")]
        scheme: SchemeChoice,
        /// Largest dyadic index `N`.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Number of initialization seeds for the original scheme.
        #[arg(long, default_value_t = 5)]
        restarts: u64,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
    },
    /// Loss surface around a trained model.
    Landscape {
        #[arg(long)]
        report: PathBuf,
        /// Dataset CSV used for training (default: `dataset.csv` beside or above the report).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 51)]
        grid: usize,
    },
    /// Fourier coefficients of a one-feature model.
    Fourier {
        /// Trained report; otherwise `--layers` with `--params` or random parameters.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Option<Vec<f64>>,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        encode_scale: f64,
        #[arg(long, default_value_t = 8)]
        orders: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CountModelArg {
    Poisson,
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = crate::noise::DEFAULT_TOTAL_COUNTS)]
    pub counts: u64,
    #[arg(long, default_value_t = crate::noise::DEFAULT_REPETITIONS)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "poisson")]
    pub model: CountModelArg,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
}

/// Exit code for an error raised while running a command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_)) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
