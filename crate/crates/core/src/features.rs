//! Per-epoch feature extraction and the cohort-level physiologic rejection
//! pass.
//!
//! Each retained 30-second epoch yields one row of (heart rate, heart-rate
//! variability, activity count). Heart rate is `60 / mean(IBI)` in beats per
//! minute and HRV is the population standard deviation of the inter-beat
//! intervals in seconds; windows with fewer than three detected peaks have no
//! defined features and are dropped (and counted). Unscored epochs are
//! excluded from both training and scoring.
//!
//! Rejection is a two-pass procedure over a cohort: the HRV mean and standard
//! deviation are computed over *all* defined windows first, then windows with
//! a heart rate above 180 bpm or an HRV farther than two standard deviations
//! from the cohort mean are dropped. Fitting ([`fit_rejection`]) and applying
//! ([`apply_rejection`]) are separate so cross-validation can freeze the
//! statistics of the training subjects and apply them unchanged to held-out
//! subjects.

use crate::error::{Error, Result};
use crate::model::{
    map_stage, Demographics, FeatureMatrix, PpgRecord, SleepWakeLabel, SubjectRecord, COL_ACT,
    COL_HR, COL_HRV,
};
use crate::peaks::{default_max_scale, detect_peaks};
use crate::preprocess::{preprocess_record, PreprocessConfig};
use crate::stats::{mean, mean_std};

/// Windows need at least this many peaks for a defined IBI spread.
pub const MIN_PEAKS_PER_WINDOW: usize = 3;
/// Physiologic ceiling on window heart rate.
pub const HR_MAX_BPM: f64 = 180.0;
/// Width of the HRV acceptance band in cohort standard deviations.
pub const HRV_BAND_SIGMAS: f64 = 2.0;

/// Features of one scored epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFeatures {
    pub epoch_index: usize,
    pub mean_ibi_s: f64,
    pub hr_bpm: f64,
    pub hrv_s: f64,
    pub activity: f64,
    pub label: SleepWakeLabel,
}

/// One subject's defined, scored windows plus extraction bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectWindows {
    pub subject_id: String,
    pub demographics: Demographics,
    pub windows: Vec<WindowFeatures>,
    pub stats: ExtractionStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtractionStats {
    /// Labelled epochs considered.
    pub epochs: usize,
    /// Windows dropped because fewer than three peaks were detected.
    pub undefined_windows: usize,
    /// Epochs excluded because their stage label was unscored.
    pub unscored_epochs: usize,
}

/// Frozen rejection statistics: fit on one cohort, applicable to any other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionCriteria {
    pub hr_max_bpm: f64,
    pub hrv_mean_s: f64,
    pub hrv_std_s: f64,
    pub band_sigmas: f64,
}

impl RejectionCriteria {
    /// True when the window survives both rules.
    pub fn retains(&self, w: &WindowFeatures) -> bool {
        w.hr_bpm <= self.hr_max_bpm
            && (w.hrv_s - self.hrv_mean_s).abs() <= self.band_sigmas * self.hrv_std_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionStats {
    pub windows_before: usize,
    /// Dropped by the heart-rate rule (checked first; a window violating both
    /// rules counts here only).
    pub dropped_hr: usize,
    /// Dropped by the HRV band rule.
    pub dropped_hrv: usize,
    pub retained: usize,
    pub subjects_before: usize,
    /// Subjects left with zero retained windows and removed from the cohort.
    pub subjects_dropped: usize,
    pub criteria: RejectionCriteria,
}

// ---------------------------------------------------------------------------
// Segmentation and per-window features
// ---------------------------------------------------------------------------

/// Split a preprocessed recording into non-overlapping whole epochs; a
/// trailing partial window is dropped. Returns `(epoch_index, samples)`
/// pairs.
pub fn segment_windows(record: &PpgRecord) -> Vec<(usize, &[f64])> {
    segment_samples(record.samples(), record.fs_hz())
}

fn segment_samples(samples: &[f64], fs_hz: f64) -> Vec<(usize, &[f64])> {
    let len = crate::model::epoch_samples(fs_hz);
    samples
        .chunks_exact(len)
        .enumerate()
        .collect()
}

/// Compute one epoch's features from its detected peaks, activity count, and
/// collapsed label. Returns `None` when fewer than [`MIN_PEAKS_PER_WINDOW`]
/// peaks leave the IBI spread undefined.
pub fn window_features(
    epoch_index: usize,
    peaks: &crate::model::PeakList,
    activity: f64,
    label: SleepWakeLabel,
) -> Option<WindowFeatures> {
    if peaks.len() < MIN_PEAKS_PER_WINDOW {
        return None;
    }
    let intervals = peaks.intervals_s();
    let mean_ibi_s = mean(&intervals);
    let (_, hrv_s) = mean_std(&intervals);
    Some(WindowFeatures {
        epoch_index,
        mean_ibi_s,
        hr_bpm: 60.0 / mean_ibi_s,
        hrv_s,
        activity,
        label,
    })
}

/// Run the per-subject pipeline: preprocess the PPG, segment it into epochs,
/// detect peaks per window, and assemble defined, scored window features.
pub fn extract_subject(
    record: &SubjectRecord,
    pre_cfg: &PreprocessConfig,
) -> Result<SubjectWindows> {
    let processed = preprocess_record(&record.ppg, pre_cfg)?;
    let max_scale = default_max_scale(processed.fs_hz());
    let segments = segment_windows(&processed);

    let mut windows = Vec::new();
    let mut stats = ExtractionStats::default();
    for ((epoch, samples), (stage, activity)) in segments
        .into_iter()
        .zip(record.stages.iter().zip(record.activity.counts()))
    {
        stats.epochs += 1;
        let Some(label) = map_stage(*stage) else {
            stats.unscored_epochs += 1;
            continue;
        };
        let peaks = detect_peaks(samples, processed.fs_hz(), max_scale)?;
        match window_features(epoch, &peaks, *activity, label) {
            Some(w) => windows.push(w),
            None => stats.undefined_windows += 1,
        }
    }

    Ok(SubjectWindows {
        subject_id: record.subject_id().to_string(),
        demographics: record.demographics,
        windows,
        stats,
    })
}

// ---------------------------------------------------------------------------
// Rejection
// ---------------------------------------------------------------------------

/// Fit the HRV band statistics over every defined window in the cohort
/// (pass one of the rejection procedure).
pub fn fit_rejection(cohort: &[SubjectWindows]) -> Result<RejectionCriteria> {
    let hrvs: Vec<f64> = cohort
        .iter()
        .flat_map(|s| s.windows.iter().map(|w| w.hrv_s))
        .collect();
    if hrvs.is_empty() {
        return Err(Error::empty(
            "rejection statistics need at least one defined window",
        ));
    }
    let (hrv_mean_s, hrv_std_s) = mean_std(&hrvs);
    Ok(RejectionCriteria {
        hr_max_bpm: HR_MAX_BPM,
        hrv_mean_s,
        hrv_std_s,
        band_sigmas: HRV_BAND_SIGMAS,
    })
}

/// Apply frozen rejection criteria to a cohort (pass two). Subjects left
/// with zero retained windows are removed and counted.
pub fn apply_rejection(
    cohort: &[SubjectWindows],
    criteria: &RejectionCriteria,
) -> (Vec<SubjectWindows>, RejectionStats) {
    let mut stats = RejectionStats {
        windows_before: 0,
        dropped_hr: 0,
        dropped_hrv: 0,
        retained: 0,
        subjects_before: cohort.len(),
        subjects_dropped: 0,
        criteria: *criteria,
    };
    let mut out = Vec::with_capacity(cohort.len());
    for subject in cohort {
        let mut kept = Vec::with_capacity(subject.windows.len());
        for w in &subject.windows {
            stats.windows_before += 1;
            if w.hr_bpm > criteria.hr_max_bpm {
                stats.dropped_hr += 1;
            } else if (w.hrv_s - criteria.hrv_mean_s).abs()
                > criteria.band_sigmas * criteria.hrv_std_s
            {
                stats.dropped_hrv += 1;
            } else {
                kept.push(w.clone());
            }
        }
        if kept.is_empty() {
            stats.subjects_dropped += 1;
        } else {
            stats.retained += kept.len();
            out.push(SubjectWindows {
                subject_id: subject.subject_id.clone(),
                demographics: subject.demographics,
                windows: kept,
                stats: subject.stats,
            });
        }
    }
    (out, stats)
}

/// Two-pass rejection over one cohort: fit the statistics, then apply them.
pub fn reject_windows(cohort: &[SubjectWindows]) -> Result<(Vec<SubjectWindows>, RejectionStats)> {
    let criteria = fit_rejection(cohort)?;
    Ok(apply_rejection(cohort, &criteria))
}

// ---------------------------------------------------------------------------
// Matrix assembly
// ---------------------------------------------------------------------------

/// Assemble a subject's retained windows into the fixed-column feature
/// matrix, rows in epoch order.
pub fn assemble_matrix(subject: &SubjectWindows) -> Result<FeatureMatrix> {
    if subject.windows.is_empty() {
        return Err(Error::empty(format!(
            "subject {} has no retained windows to assemble",
            subject.subject_id
        )));
    }
    let mut rows = Vec::with_capacity(subject.windows.len());
    let mut epochs = Vec::with_capacity(subject.windows.len());
    let mut labels = Vec::with_capacity(subject.windows.len());
    for w in &subject.windows {
        let mut row = [0.0; 3];
        row[COL_HR] = w.hr_bpm;
        row[COL_HRV] = w.hrv_s;
        row[COL_ACT] = w.activity;
        rows.push(row);
        epochs.push(w.epoch_index);
        labels.push(w.label);
    }
    FeatureMatrix::new(&subject.subject_id, rows, epochs, labels)
}

/// Rebuild per-window features from a stored feature matrix (the mean IBI is
/// recovered from the heart rate).
pub fn subject_from_matrix(matrix: &FeatureMatrix, demographics: Demographics) -> SubjectWindows {
    let windows = matrix
        .rows()
        .iter()
        .zip(matrix.epoch_index())
        .zip(matrix.labels())
        .map(|((row, &epoch_index), &label)| WindowFeatures {
            epoch_index,
            mean_ibi_s: 60.0 / row[COL_HR],
            hr_bpm: row[COL_HR],
            hrv_s: row[COL_HRV],
            activity: row[COL_ACT],
            label,
        })
        .collect();
    SubjectWindows {
        subject_id: matrix.subject_id().to_string(),
        demographics,
        windows,
        stats: ExtractionStats::default(),
    }
}
