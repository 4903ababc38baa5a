//! Shared domain types: recordings, labels, demographics, and the small
//! value types passed between pipeline stages.
//!
//! Epochs are fixed 30-second scoring intervals throughout; all stage-to-class
//! collapsing goes through [`map_stage`] so the wake/sleep grouping exists in
//! exactly one place.

use crate::error::{Error, Result};

/// Length of one scoring epoch in seconds.
pub const EPOCH_SECONDS: f64 = 30.0;

/// Number of samples covering one whole epoch at `fs_hz`.
pub fn epoch_samples(fs_hz: f64) -> usize {
    (EPOCH_SECONDS * fs_hz).round() as usize
}

// ---------------------------------------------------------------------------
// Labels and demographics
// ---------------------------------------------------------------------------

/// Five-stage scoring vocabulary plus an explicit unscored marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageLabel {
    Wake,
    N1,
    N2,
    N3,
    Rem,
    Unscored,
}

impl StageLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StageLabel::Wake => "W",
            StageLabel::N1 => "N1",
            StageLabel::N2 => "N2",
            StageLabel::N3 => "N3",
            StageLabel::Rem => "REM",
            StageLabel::Unscored => "U",
        }
    }

    pub fn parse(s: &str) -> Option<StageLabel> {
        match s {
            "W" => Some(StageLabel::Wake),
            "N1" => Some(StageLabel::N1),
            "N2" => Some(StageLabel::N2),
            "N3" => Some(StageLabel::N3),
            "REM" => Some(StageLabel::Rem),
            "U" => Some(StageLabel::Unscored),
            _ => None,
        }
    }
}

/// Binary scoring target. Sleep is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SleepWakeLabel {
    Wake,
    Sleep,
}

impl SleepWakeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SleepWakeLabel::Wake => "W",
            SleepWakeLabel::Sleep => "S",
        }
    }

    pub fn parse(s: &str) -> Option<SleepWakeLabel> {
        match s {
            "W" => Some(SleepWakeLabel::Wake),
            "S" => Some(SleepWakeLabel::Sleep),
            _ => None,
        }
    }
}

/// Collapse a five-stage label onto the binary target.
///
/// Wake maps to wake; every asleep stage (N1, N2, N3, REM) maps to sleep;
/// unscored epochs map to `None` and are excluded from training and scoring.
pub fn map_stage(stage: StageLabel) -> Option<SleepWakeLabel> {
    match stage {
        StageLabel::Wake => Some(SleepWakeLabel::Wake),
        StageLabel::N1 | StageLabel::N2 | StageLabel::N3 | StageLabel::Rem => {
            Some(SleepWakeLabel::Sleep)
        }
        StageLabel::Unscored => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    Male,
    Female,
    Unspecified,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unspecified => "unspecified",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "male" => Some(Gender::Male),
            "female" => Some(Gender::Female),
            "unspecified" => Some(Gender::Unspecified),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Demographics {
    /// Age in whole years.
    pub age: u32,
    pub gender: Gender,
}

// ---------------------------------------------------------------------------
// Recordings
// ---------------------------------------------------------------------------

/// A validated PPG recording: finite samples, positive sampling rate, and at
/// least one whole epoch of signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgRecord {
    subject_id: String,
    fs_hz: f64,
    samples: Vec<f64>,
}

impl PpgRecord {
    pub fn new(subject_id: impl Into<String>, fs_hz: f64, samples: Vec<f64>) -> Result<Self> {
        let subject_id = subject_id.into();
        if !fs_hz.is_finite() || fs_hz <= 0.0 {
            return Err(Error::InvalidSamplingRate { fs_hz });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                subject: subject_id,
                index,
            });
        }
        if samples.len() < epoch_samples(fs_hz) {
            return Err(Error::RecordTooShort {
                subject: subject_id,
                samples: samples.len(),
                fs_hz,
                epoch_s: EPOCH_SECONDS,
            });
        }
        Ok(PpgRecord {
            subject_id,
            fs_hz,
            samples,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of whole epochs covered by the recording.
    pub fn whole_epochs(&self) -> usize {
        self.samples.len() / epoch_samples(self.fs_hz)
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs_hz
    }
}

/// Per-epoch activity counts (one value per epoch, finite and non-negative).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySeries {
    counts: Vec<f64>,
}

impl ActivitySeries {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        if let Some(index) = counts.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidActivityCount {
                index,
                value: counts[index],
            });
        }
        Ok(ActivitySeries { counts })
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// One subject's aligned recording, activity, stages, and demographics.
///
/// Invariants: one activity value and one stage label per epoch, and the PPG
/// covers the labelled span (its duration may fall short of
/// `stages.len() * 30 s` by at most one sample period).
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub demographics: Demographics,
    pub ppg: PpgRecord,
    pub activity: ActivitySeries,
    pub stages: Vec<StageLabel>,
}

impl SubjectRecord {
    pub fn new(
        demographics: Demographics,
        ppg: PpgRecord,
        activity: ActivitySeries,
        stages: Vec<StageLabel>,
    ) -> Result<Self> {
        if activity.len() != stages.len() {
            return Err(Error::EpochMismatch {
                subject: ppg.subject_id().to_string(),
                ppg_epochs: ppg.whole_epochs(),
                labels: stages.len(),
                activity: activity.len(),
            });
        }
        let needed = stages.len() as f64 * EPOCH_SECONDS * ppg.fs_hz() - 1.0;
        if (ppg.len() as f64) < needed {
            return Err(Error::EpochMismatch {
                subject: ppg.subject_id().to_string(),
                ppg_epochs: ppg.whole_epochs(),
                labels: stages.len(),
                activity: activity.len(),
            });
        }
        Ok(SubjectRecord {
            demographics,
            ppg,
            activity,
            stages,
        })
    }

    pub fn subject_id(&self) -> &str {
        self.ppg.subject_id()
    }

    pub fn epochs(&self) -> usize {
        self.stages.len()
    }
}

// ---------------------------------------------------------------------------
// Feature matrix
// ---------------------------------------------------------------------------

/// Column index of heart rate (bpm) in a feature row.
pub const COL_HR: usize = 0;
/// Column index of heart-rate variability (seconds) in a feature row.
pub const COL_HRV: usize = 1;
/// Column index of the activity count in a feature row.
pub const COL_ACT: usize = 2;

/// Per-subject feature rows in fixed (HR, HRV, activity) column order, one
/// row per retained epoch, aligned with the epoch index and binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    subject_id: String,
    rows: Vec<[f64; 3]>,
    epoch_index: Vec<usize>,
    labels: Vec<SleepWakeLabel>,
}

impl FeatureMatrix {
    pub fn new(
        subject_id: impl Into<String>,
        rows: Vec<[f64; 3]>,
        epoch_index: Vec<usize>,
        labels: Vec<SleepWakeLabel>,
    ) -> Result<Self> {
        if rows.len() != epoch_index.len() || rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "feature matrix fields disagree in length: {} rows, {} epoch indices, {} labels",
                rows.len(),
                epoch_index.len(),
                labels.len()
            )));
        }
        for (row, values) in rows.iter().enumerate() {
            for (col, value) in values.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFiniteFeature { row, col });
                }
            }
        }
        for row in 1..epoch_index.len() {
            if epoch_index[row] <= epoch_index[row - 1] {
                return Err(Error::NonIncreasingEpochs { row });
            }
        }
        Ok(FeatureMatrix {
            subject_id: subject_id.into(),
            rows,
            epoch_index,
            labels,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }

    pub fn epoch_index(&self) -> &[usize] {
        &self.epoch_index
    }

    pub fn labels(&self) -> &[SleepWakeLabel] {
        &self.labels
    }
}

// ---------------------------------------------------------------------------
// Filters and peak lists
// ---------------------------------------------------------------------------

/// One second-order IIR section with normalized denominator
/// (`a0 == 1` implied): `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Stability of the denominator via the triangle criterion:
    /// `|a2| < 1` and `|a1| < 1 + a2`.
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }
}

/// A cascade of second-order sections plus an overall gain.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoefficients {
    pub sections: Vec<Biquad>,
    pub gain: f64,
}

impl FilterCoefficients {
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// Magnitude response |H(f)| of the cascade at `f_hz` for signals sampled
    /// at `fs_hz`, evaluated directly from the coefficients on the unit
    /// circle.
    pub fn magnitude_at(&self, f_hz: f64, fs_hz: f64) -> f64 {
        use std::f64::consts::PI;
        let omega = 2.0 * PI * f_hz / fs_hz;
        // z^-1 = e^{-j omega}; evaluate each section as a complex ratio.
        let (c1, s1) = (omega.cos(), -omega.sin());
        let (c2, s2) = ((2.0 * omega).cos(), -(2.0 * omega).sin());
        let mut mag = self.gain.abs();
        for s in &self.sections {
            let num_re = s.b0 + s.b1 * c1 + s.b2 * c2;
            let num_im = s.b1 * s1 + s.b2 * s2;
            let den_re = 1.0 + s.a1 * c1 + s.a2 * c2;
            let den_im = s.a1 * s1 + s.a2 * s2;
            mag *= (num_re * num_re + num_im * num_im).sqrt()
                / (den_re * den_re + den_im * den_im).sqrt();
        }
        mag
    }
}

/// Detected pulse-peak sample indices within one analysis window, strictly
/// increasing, tagged with the sampling rate they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    fs_hz: f64,
    indices: Vec<usize>,
}

impl PeakList {
    pub fn new(fs_hz: f64, indices: Vec<usize>) -> Result<Self> {
        if !fs_hz.is_finite() || fs_hz <= 0.0 {
            return Err(Error::InvalidSamplingRate { fs_hz });
        }
        for i in 1..indices.len() {
            if indices[i] <= indices[i - 1] {
                return Err(Error::invalid(format!(
                    "peak indices must be strictly increasing (index {} repeats or decreases)",
                    i
                )));
            }
        }
        Ok(PeakList { fs_hz, indices })
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Inter-beat intervals in seconds between consecutive peaks.
    pub fn intervals_s(&self) -> Vec<f64> {
        self.indices
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 / self.fs_hz)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stage_mapping_is_total_and_groups_non_wake_as_sleep() {
        assert_eq!(map_stage(StageLabel::Wake), Some(SleepWakeLabel::Wake));
        assert_eq!(map_stage(StageLabel::N1), Some(SleepWakeLabel::Sleep));
        assert_eq!(map_stage(StageLabel::N2), Some(SleepWakeLabel::Sleep));
        assert_eq!(map_stage(StageLabel::N3), Some(SleepWakeLabel::Sleep));
        assert_eq!(map_stage(StageLabel::Rem), Some(SleepWakeLabel::Sleep));
        assert_eq!(map_stage(StageLabel::Unscored), None);
    }

    #[test]
    fn stage_labels_round_trip_through_strings() {
        for stage in [
            StageLabel::Wake,
            StageLabel::N1,
            StageLabel::N2,
            StageLabel::N3,
            StageLabel::Rem,
            StageLabel::Unscored,
        ] {
            assert_eq!(StageLabel::parse(stage.as_str()), Some(stage));
        }
        assert_eq!(StageLabel::parse("N4"), None);
    }

    #[test]
    fn ppg_record_accepts_exactly_one_epoch() {
        let rec = PpgRecord::new("s1", 34.0, vec![0.0; 1020]).unwrap();
        assert_eq!(rec.whole_epochs(), 1);
        assert_eq!(rec.len(), 1020);
    }

    #[test]
    fn ppg_record_rejects_sub_epoch_recordings() {
        let err = PpgRecord::new("s1", 34.0, vec![0.0; 1019]).unwrap_err();
        match err {
            Error::RecordTooShort { samples, .. } => assert_eq!(samples, 1019),
            other => panic!("expected RecordTooShort, got {other:?}"),
        }
    }

    #[test]
    fn ppg_record_rejects_non_finite_samples_with_index() {
        let mut samples = vec![0.0; 7680];
        samples[1234] = f64::NAN;
        let err = PpgRecord::new("s1", 256.0, samples).unwrap_err();
        match err {
            Error::NonFiniteSample { subject, index } => {
                assert_eq!(subject, "s1");
                assert_eq!(index, 1234);
            }
            other => panic!("expected NonFiniteSample, got {other:?}"),
        }
    }

    #[test]
    fn ppg_record_rejects_bad_sampling_rates() {
        assert!(PpgRecord::new("s1", 0.0, vec![0.0; 10]).is_err());
        assert!(PpgRecord::new("s1", -5.0, vec![0.0; 10]).is_err());
        assert!(PpgRecord::new("s1", f64::NAN, vec![0.0; 10]).is_err());
    }

    #[test]
    fn activity_series_rejects_negative_counts_with_context() {
        let err = ActivitySeries::new(vec![1.0, 2.0, -3.0]).unwrap_err();
        match err {
            Error::InvalidActivityCount { index, value } => {
                assert_eq!(index, 2);
                assert_eq!(value, -3.0);
            }
            other => panic!("expected InvalidActivityCount, got {other:?}"),
        }
    }

    #[test]
    fn subject_record_requires_one_activity_value_per_stage() {
        let demo = Demographics {
            age: 70,
            gender: Gender::Female,
        };
        let ppg = PpgRecord::new("s1", 256.0, vec![0.0; 7680 * 2]).unwrap();
        let activity = ActivitySeries::new(vec![0.0; 2]).unwrap();
        let stages = vec![StageLabel::Wake; 3];
        let err = SubjectRecord::new(demo, ppg, activity, stages).unwrap_err();
        match err {
            Error::EpochMismatch {
                labels, activity, ..
            } => {
                assert_eq!((labels, activity), (3, 2));
            }
            other => panic!("expected EpochMismatch, got {other:?}"),
        }
    }

    #[test]
    fn subject_record_requires_ppg_to_cover_the_labelled_span() {
        let demo = Demographics {
            age: 70,
            gender: Gender::Male,
        };
        // Two epochs of PPG but three labelled epochs.
        let ppg = PpgRecord::new("s1", 256.0, vec![0.0; 7680 * 2]).unwrap();
        let activity = ActivitySeries::new(vec![0.0; 3]).unwrap();
        let stages = vec![StageLabel::N2; 3];
        assert!(SubjectRecord::new(demo, ppg, activity, stages).is_err());
    }

    #[test]
    fn feature_matrix_rejects_nan_with_row_and_column() {
        let rows = vec![[60.0, 0.05, 3.0], [58.0, f64::NAN, 0.0]];
        let err = FeatureMatrix::new(
            "s1",
            rows,
            vec![0, 1],
            vec![SleepWakeLabel::Wake, SleepWakeLabel::Sleep],
        )
        .unwrap_err();
        match err {
            Error::NonFiniteFeature { row, col } => assert_eq!((row, col), (1, 1)),
            other => panic!("expected NonFiniteFeature, got {other:?}"),
        }
    }

    #[test]
    fn feature_matrix_requires_strictly_increasing_epochs() {
        let rows = vec![[60.0, 0.05, 3.0], [58.0, 0.04, 0.0]];
        let err = FeatureMatrix::new(
            "s1",
            rows,
            vec![5, 5],
            vec![SleepWakeLabel::Wake, SleepWakeLabel::Sleep],
        )
        .unwrap_err();
        match err {
            Error::NonIncreasingEpochs { row } => assert_eq!(row, 1),
            other => panic!("expected NonIncreasingEpochs, got {other:?}"),
        }
    }

    #[test]
    fn empty_feature_matrix_is_allowed() {
        let m = FeatureMatrix::new("s1", vec![], vec![], vec![]).unwrap();
        assert_eq!(m.n_rows(), 0);
        assert!(m.is_empty());
    }

    /// Mostly-finite values with occasional NaN / infinities mixed in.
    fn entry() -> impl Strategy<Value = f64> + Clone {
        prop_oneof![
            6 => -1e6..1e6f64,
            1 => Just(f64::NAN),
            1 => Just(f64::INFINITY),
            1 => Just(f64::NEG_INFINITY),
        ]
    }

    proptest! {
        /// Construction succeeds exactly when every entry is finite.
        #[test]
        fn feature_matrix_accepts_iff_all_entries_finite(
            raw in proptest::collection::vec([entry(), entry(), entry()], 0..40)
        ) {
            let n = raw.len();
            let epochs: Vec<usize> = (0..n).collect();
            let labels = vec![SleepWakeLabel::Sleep; n];
            let all_finite = raw.iter().all(|r| r.iter().all(|v| v.is_finite()));
            let built = FeatureMatrix::new("p", raw, epochs, labels);
            prop_assert_eq!(built.is_ok(), all_finite);
        }
    }

    #[test]
    fn biquad_stability_criterion() {
        let stable = Biquad {
            b0: 1.0,
            b1: 0.0,
            b2: 0.0,
            a1: -1.1,
            a2: 0.3,
        };
        assert!(stable.is_stable(), "|a1| < 1 + a2 should be stable");
        let unstable = Biquad {
            a2: 1.0,
            ..stable
        };
        assert!(!unstable.is_stable(), "|a2| >= 1 must be unstable");
        let unstable2 = Biquad {
            a1: -1.4,
            a2: 0.3,
            ..stable
        };
        assert!(!unstable2.is_stable(), "|a1| >= 1 + a2 must be unstable");
    }

    #[test]
    fn peak_list_requires_strictly_increasing_indices() {
        assert!(PeakList::new(34.0, vec![3, 3]).is_err());
        assert!(PeakList::new(34.0, vec![5, 4]).is_err());
        let peaks = PeakList::new(34.0, vec![0, 17, 51]).unwrap();
        let ibis = peaks.intervals_s();
        assert!((ibis[0] - 0.5).abs() < 1e-12, "ibis[0] = {}", ibis[0]);
        assert!((ibis[1] - 1.0).abs() < 1e-12, "ibis[1] = {}", ibis[1]);
    }

    #[test]
    fn epoch_samples_at_common_rates() {
        assert_eq!(epoch_samples(256.0), 7680);
        assert_eq!(epoch_samples(34.0), 1020);
    }
}
