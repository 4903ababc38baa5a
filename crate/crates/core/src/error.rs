//! Crate-wide error type.
//!
//! Every failure in the library surfaces as a typed [`Error`]; nothing in the
//! public API panics on bad input. Variants carry enough context (subject id,
//! path, line or sample index, counts) for a caller to report the failure
//! without re-deriving it.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by callers that must map failures onto an
/// exit-code contract: I/O, data validation, or evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Data,
    Protocol,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // ---- I/O ----
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("subject {subject}: referenced file {path} does not exist")]
    MissingFile { subject: String, path: PathBuf },

    // ---- parsing / data validation ----
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: missing required header key `{key}`")]
    MissingHeaderKey { path: PathBuf, key: String },
    #[error("manifest lists subject {subject} more than once")]
    DuplicateSubject { subject: String },
    #[error("invalid sampling rate {fs_hz} Hz (must be finite and positive)")]
    InvalidSamplingRate { fs_hz: f64 },
    #[error("subject {subject}: non-finite PPG sample at index {index}")]
    NonFiniteSample { subject: String, index: usize },
    #[error("activity count at index {index} is invalid ({value}); counts must be finite and non-negative")]
    InvalidActivityCount { index: usize, value: f64 },
    #[error("subject {subject}: recording of {samples} samples at {fs_hz} Hz is shorter than one {epoch_s} s epoch")]
    RecordTooShort {
        subject: String,
        samples: usize,
        fs_hz: f64,
        epoch_s: f64,
    },
    #[error("subject {subject}: epoch counts disagree (ppg covers {ppg_epochs} whole epochs, {labels} stage labels, {activity} activity values)")]
    EpochMismatch {
        subject: String,
        ppg_epochs: usize,
        labels: usize,
        activity: usize,
    },
    #[error("feature matrix row {row}, column {col} is not finite")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("feature matrix epoch indices must be strictly increasing (row {row})")]
    NonIncreasingEpochs { row: usize },
    #[error("{message}")]
    InvalidInput { message: String },

    // ---- numeric / signal processing ----
    #[error("filter design failed: {message}")]
    FilterDesign { message: String },
    #[error("signal of {len} samples is too short (minimum {min})")]
    SignalTooShort { len: usize, min: usize },
    #[error("resampling requires from_hz > to_hz > 0, got {from_hz} -> {to_hz}")]
    InvalidResampleRates { from_hz: f64, to_hz: f64 },

    // ---- training ----
    #[error("training labels contain a single class; cannot fit {kind}")]
    SingleClassTraining { kind: String },
    #[error("model expects {expected} feature columns, input has {got}")]
    FeatureArityMismatch { expected: usize, got: usize },
    #[error("invalid hyperparameter {name}: {message}")]
    InvalidHyperparameter { name: String, message: String },
    #[error("model text format, line {line}: {message}")]
    ModelParse { line: usize, message: String },

    // ---- evaluation protocol ----
    #[error("grouped {k}-fold split needs at least {k} subjects, got {subjects}")]
    TooFewSubjects { subjects: usize, k: usize },
    #[error("fold {fold}: training labels contain a single class after rejection")]
    SingleClassFold { fold: usize },
    #[error("prediction/label sequences differ in length ({truths} vs {predictions})")]
    PredictionLengthMismatch { truths: usize, predictions: usize },
    #[error("empty input: {context}")]
    Empty { context: String },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Io { .. } | MissingFile { .. } => ErrorCategory::Io,
            TooFewSubjects { .. }
            | SingleClassFold { .. }
            | SingleClassTraining { .. }
            | PredictionLengthMismatch { .. } => ErrorCategory::Protocol,
            _ => ErrorCategory::Data,
        }
    }

    /// Wrap a filesystem failure with the path it concerned. Public so
    /// frontends can classify their own I/O under the same contract.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput {
            message: message.into(),
        }
    }

    pub(crate) fn empty(context: impl Into<String>) -> Self {
        Error::Empty {
            context: context.into(),
        }
    }
}
