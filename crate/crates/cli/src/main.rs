//! `sleepwake` — batch toolchain for PPG + actigraphy sleep-wake scoring.
//!
//! Three file-to-file commands (`synth`, `features`, `evaluate`) cover the
//! pipeline; each can be driven by flags, a `key = value` config file, or
//! both, with flags taking precedence. Exit codes are a stable contract:
//! 0 success, 2 usage, 3 I/O, 4 data validation, 5 evaluation protocol.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sleepwake_core::ErrorCategory;

#[derive(Parser, Debug)]
#[command(
    name = "sleepwake",
    version,
    about = "Sleep-wake classification from wrist PPG and actigraphy",
    propagate_version = true
)]
pub struct Cli {
    /// Plain-text `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker-thread cap for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)] // one short-lived value per process; boxing buys nothing
pub enum Command {
    /// Generate a synthetic cohort with exact ground truth.
    Synth(SynthArgs),
    /// Extract per-epoch features from a recorded dataset.
    Features(FeaturesArgs),
    /// Train and evaluate a classifier with grouped cross-validation.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output directory for the cohort (required here or in the config).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Number of subjects.
    #[arg(long, value_name = "N")]
    pub subjects: Option<usize>,
    /// 30 s epochs per subject.
    #[arg(long, value_name = "N")]
    pub epochs: Option<usize>,
    /// Master seed; one seed reproduces the cohort byte for byte.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Target SNR in dB (`inf` renders noise-free signals).
    #[arg(long = "snr-db", value_name = "DB")]
    pub snr_db: Option<f64>,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// Dataset manifest (falls back to $SLEEPWAKE_DATA_ROOT/manifest.csv).
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Output directory for feature tables and the rejection report.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// `true` (default): defer window rejection so evaluation refits it on
    /// each fold's training split; `false`: apply it globally now.
    #[arg(long = "fold-frozen-rejection", value_name = "BOOL")]
    pub fold_frozen_rejection: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Feature-set manifest (falls back to
    /// $SLEEPWAKE_DATA_ROOT/features/features.csv).
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,
    /// Classifier: logistic | rf | gbdt.
    #[arg(long, value_name = "KIND")]
    pub model: Option<String>,
    /// Number of grouped cross-validation folds.
    #[arg(long, value_name = "N")]
    pub k: Option<usize>,
    /// Seed for fold assignment and any model randomness.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Decision threshold on the sleep probability.
    #[arg(long, value_name = "P")]
    pub threshold: Option<f64>,
    /// Output directory for the report tables.
    #[arg(long = "report-dir", value_name = "DIR")]
    pub report_dir: Option<PathBuf>,
    /// Feature columns: `all` (HR, HRV, activity) or `act-only`.
    #[arg(long = "feature-set", value_name = "SET")]
    pub feature_set: Option<String>,
    /// Weight multiplier for sleep-class training windows.
    #[arg(long = "positive-weight", value_name = "X")]
    pub positive_weight: Option<f64>,

    // Logistic-regression overrides.
    /// L2 penalty strength (logistic).
    #[arg(long, value_name = "X")]
    pub lambda: Option<f64>,
    /// Newton iteration cap (logistic).
    #[arg(long = "max-iterations", value_name = "N")]
    pub max_iterations: Option<usize>,

    // Random-forest overrides.
    /// Number of trees (rf).
    #[arg(long, value_name = "N")]
    pub trees: Option<usize>,
    /// Features sampled per split (rf).
    #[arg(long, value_name = "N")]
    pub mtry: Option<usize>,
    /// Minimum samples per leaf (rf).
    #[arg(long = "min-leaf", value_name = "N")]
    pub min_leaf: Option<usize>,

    // Gradient-boosting overrides.
    /// Boosting rounds (gbdt).
    #[arg(long, value_name = "N")]
    pub rounds: Option<usize>,
    /// Maximum tree depth (gbdt).
    #[arg(long = "max-depth", value_name = "N")]
    pub max_depth: Option<usize>,
    /// Shrinkage per round (gbdt).
    #[arg(long = "learning-rate", value_name = "X")]
    pub learning_rate: Option<f64>,
    /// L2 penalty on leaf weights (gbdt).
    #[arg(long = "reg-lambda", value_name = "X")]
    pub reg_lambda: Option<f64>,
    /// Minimum split gain (gbdt).
    #[arg(long, value_name = "X")]
    pub gamma: Option<f64>,
    /// Minimum hessian mass per child (gbdt).
    #[arg(long = "min-child-weight", value_name = "X")]
    pub min_child_weight: Option<f64>,
}

/// Command-level failure with its exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config, or invalid hyperparameter values → exit 2.
    Usage(String),
    /// Pipeline failure → exit 3 (I/O), 4 (data), or 5 (protocol).
    Core(sleepwake_core::Error),
}

impl From<sleepwake_core::Error> for CliError {
    fn from(e: sleepwake_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Io => 3,
                ErrorCategory::Data => 4,
                ErrorCategory::Protocol => 5,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
