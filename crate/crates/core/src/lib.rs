//! Sleep-wake scoring from wrist photoplethysmography and actigraphy.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! * [`model`] — shared domain types (records, labels, demographics).
//! * [`ingest`] — delimited-text dataset and feature-table I/O with typed errors.
//! * [`preprocess`] — low-pass filtering, resampling, clipping, normalization.
//! * [`peaks`] — deterministic multiscale pulse-peak detection.
//! * [`features`] — per-epoch heart-rate / variability / activity features
//!   plus the cohort-level physiologic rejection pass.
//! * [`learn`] — natively implemented classifiers (logistic regression,
//!   random forest, gradient-boosted trees) with text serialization.
//! * [`evaluate`] — confusion metrics, subject-grouped cross-validation,
//!   stratified reporting, and sleep-architecture summaries.
//! * [`synth`] — seeded synthetic cohort generator with ground truth.

pub mod error;
pub mod evaluate;
mod seeds;
mod stats;
pub mod features;
pub mod ingest;
pub mod learn;
pub mod model;
pub mod peaks;
pub mod preprocess;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
