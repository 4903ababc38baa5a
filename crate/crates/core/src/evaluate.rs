//! Evaluation protocol: confusion metrics, subject-grouped k-fold
//! cross-validation, stratified reporting, and sleep-architecture summaries.
//!
//! Sleep is the positive class throughout. Metrics with a 0/0 denominator
//! are reported as explicitly undefined — never silently zero — so that
//! single-class folds stay loud. Cross-validation groups all of a subject's
//! windows into one fold, fits the physiologic rejection statistics and the
//! model on the training subjects only, and scores the held-out subjects;
//! the per-fold metric sets are summarized as mean ± population standard
//! deviation across folds.
//!
//! Report tables are plain delimited text (format version 1): a `#`-free
//! column-header line followed by one row per fold, stratification cell, or
//! subject. Kappa appears both in its natural [-1, 1] scale and as a
//! percentage, since both conventions are common in the literature.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{
    apply_rejection, fit_rejection, RejectionCriteria, RejectionStats, SubjectWindows,
};
use crate::learn::{train, Matrix, TrainConfig};
use crate::model::{Demographics, Gender, SleepWakeLabel};
use crate::stats::mean_std;

// ---------------------------------------------------------------------------
// Confusion counts and metric sets
// ---------------------------------------------------------------------------

/// Binary confusion counts with Sleep as the positive class. `fn_` carries a
/// trailing underscore only because `fn` is a keyword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Counts with the positive class swapped.
    pub fn transposed(&self) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }

    fn add(&mut self, truth: SleepWakeLabel, pred: SleepWakeLabel) {
        match (truth, pred) {
            (SleepWakeLabel::Sleep, SleepWakeLabel::Sleep) => self.tp += 1,
            (SleepWakeLabel::Wake, SleepWakeLabel::Sleep) => self.fp += 1,
            (SleepWakeLabel::Wake, SleepWakeLabel::Wake) => self.tn += 1,
            (SleepWakeLabel::Sleep, SleepWakeLabel::Wake) => self.fn_ += 1,
        }
    }
}

/// Tally the confusion counts of paired truth/prediction sequences.
pub fn confusion(y_true: &[SleepWakeLabel], y_pred: &[SleepWakeLabel]) -> Result<ConfusionCounts> {
    if y_true.len() != y_pred.len() {
        return Err(Error::PredictionLengthMismatch {
            truths: y_true.len(),
            predictions: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::empty("confusion counts need at least one pair"));
    }
    let mut c = ConfusionCounts::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        c.add(t, p);
    }
    Ok(c)
}

/// The five reported metrics; `None` marks a 0/0 denominator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSet {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
    pub kappa: Option<f64>,
}

impl MetricSet {
    /// All-undefined set, used when a fold ends up with nothing to score.
    pub(crate) fn undefined() -> MetricSet {
        MetricSet::default()
    }
}

/// Compute the metric set from confusion counts.
pub fn metrics(c: &ConfusionCounts) -> Result<MetricSet> {
    let n = c.total();
    if n == 0 {
        return Err(Error::empty("metrics of an all-zero confusion"));
    }
    let n = n as f64;
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let ratio = |num: f64, den: f64| if den == 0.0 { None } else { Some(num / den) };

    let accuracy = Some((tp + tn) / n);
    let sensitivity = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn_);
    let p_o = (tp + tn) / n;
    let p_e = ((tp + fn_) * (tp + fp) + (tn + fp) * (tn + fn_)) / (n * n);
    let kappa = ratio(p_o - p_e, 1.0 - p_e);
    Ok(MetricSet {
        accuracy,
        sensitivity,
        specificity,
        f1,
        kappa,
    })
}

// ---------------------------------------------------------------------------
// Fold assignment
// ---------------------------------------------------------------------------

/// Subject-to-fold map: every subject in exactly one fold, fold sizes within
/// one of each other. The assignment depends only on the id set, `k`, and
/// the seed — never on caller ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    map: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_subjects(&self) -> usize {
        self.map.len()
    }

    pub fn fold_of(&self, subject_id: &str) -> Option<usize> {
        self.map.get(subject_id).copied()
    }

    /// Subject ids of one fold, lexicographically sorted.
    pub fn subjects_in(&self, fold: usize) -> Vec<&str> {
        self.map
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Assign subjects to `k` folds: ids are sorted, shuffled by a seeded
/// Fisher-Yates pass (hand-rolled so the draw pattern is frozen into this
/// crate), and dealt round-robin.
pub fn grouped_kfold(subject_ids: &[String], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidHyperparameter {
            name: "k".to_string(),
            message: format!("{k} folds requested; need at least 2"),
        });
    }
    let mut ids: Vec<String> = subject_ids.to_vec();
    ids.sort();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::DuplicateSubject {
                subject: pair[0].clone(),
            });
        }
    }
    if ids.len() < k {
        return Err(Error::TooFewSubjects {
            subjects: ids.len(),
            k,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for i in (1..ids.len()).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }
    let map = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id, i % k))
        .collect();
    Ok(FoldAssignment { k, map })
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// When the two-pass window rejection runs relative to the folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionMode {
    /// Fit the statistics on each fold's training subjects and apply them,
    /// frozen, to the held-out subjects (no leakage; the default).
    FitOnTrain,
    /// Fit once on the whole cohort before splitting.
    Global,
    /// Skip rejection (for feature tables that already had it applied).
    None,
}

/// Whether a fold's metric set pools windows across its test subjects or
/// averages per-subject metric sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldAggregation {
    Pooled,
    PerSubjectMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub rejection: RejectionMode,
    /// Feature-matrix columns fed to the model (default all three).
    pub feature_columns: Vec<usize>,
    pub aggregation: FoldAggregation,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            seed: 0,
            rejection: RejectionMode::FitOnTrain,
            feature_columns: vec![0, 1, 2],
            aggregation: FoldAggregation::Pooled,
        }
    }
}

/// One subject's held-out predictions, in epoch order.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectOutcome {
    pub subject_id: String,
    pub demographics: Demographics,
    pub fold: usize,
    pub epoch_index: Vec<usize>,
    pub y_true: Vec<SleepWakeLabel>,
    pub y_pred: Vec<SleepWakeLabel>,
}

impl SubjectOutcome {
    /// Metric set pooled over this subject's own held-out windows.
    pub fn metrics(&self) -> Result<MetricSet> {
        metrics(&confusion(&self.y_true, &self.y_pred)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub test_subject_ids: Vec<String>,
    pub n_train_windows: usize,
    pub n_test_windows: usize,
    pub metrics: MetricSet,
    /// Rejection bookkeeping for the fold's training side (None when
    /// rejection was skipped).
    pub rejection_train: Option<RejectionStats>,
    /// Same criteria applied to the fold's held-out side.
    pub rejection_test: Option<RejectionStats>,
}

/// Mean ± population std of one metric across the folds where it was
/// defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStat {
    pub mean: f64,
    pub std: f64,
    /// Folds contributing (those where the metric was defined).
    pub folds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSummary {
    pub accuracy: Option<SummaryStat>,
    pub sensitivity: Option<SummaryStat>,
    pub specificity: Option<SummaryStat>,
    pub f1: Option<SummaryStat>,
    pub kappa: Option<SummaryStat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub assignment: FoldAssignment,
    pub folds: Vec<FoldResult>,
    pub summary: MetricSummary,
    /// Every cohort subject that retained scored windows, ordered by
    /// (fold, subject id).
    pub subjects: Vec<SubjectOutcome>,
}

fn matrix_rows(subject: &SubjectWindows, columns: &[usize]) -> Vec<Vec<f64>> {
    subject
        .windows
        .iter()
        .map(|w| {
            columns
                .iter()
                .map(|&c| match c {
                    crate::model::COL_HR => w.hr_bpm,
                    crate::model::COL_HRV => w.hrv_s,
                    _ => w.activity,
                })
                .collect()
        })
        .collect()
}

fn summarize(folds: &[FoldResult], pick: impl Fn(&MetricSet) -> Option<f64>) -> Option<SummaryStat> {
    let values: Vec<f64> = folds.iter().filter_map(|f| pick(&f.metrics)).collect();
    if values.is_empty() {
        return None;
    }
    let (mean, std) = mean_std(&values);
    Some(SummaryStat {
        mean,
        std,
        folds: values.len(),
    })
}

fn mean_of_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Run subject-grouped k-fold cross-validation over a cohort of extracted
/// (but not yet rejected) window sets.
pub fn cross_validate(
    cohort: &[SubjectWindows],
    train_config: &TrainConfig,
    cv: &CvConfig,
) -> Result<CvResult> {
    train_config.validate()?;
    if cv.feature_columns.is_empty() {
        return Err(Error::empty("cross-validation feature column selection"));
    }
    for &c in &cv.feature_columns {
        if c >= 3 {
            return Err(Error::invalid(format!(
                "feature column index {c} out of range (0..3)"
            )));
        }
    }
    for subject in cohort {
        if subject.windows.is_empty() {
            return Err(Error::empty(format!(
                "subject {} entered cross-validation with zero windows",
                subject.subject_id
            )));
        }
    }
    let ids: Vec<String> = cohort.iter().map(|s| s.subject_id.clone()).collect();
    let assignment = grouped_kfold(&ids, cv.k, cv.seed)?;

    let global_criteria: Option<RejectionCriteria> = match cv.rejection {
        RejectionMode::Global => Some(fit_rejection(cohort)?),
        _ => None,
    };
    let by_id: BTreeMap<&str, &SubjectWindows> = cohort
        .iter()
        .map(|s| (s.subject_id.as_str(), s))
        .collect();

    struct FoldOutput {
        result: FoldResult,
        outcomes: Vec<SubjectOutcome>,
    }

    let fold_outputs: Vec<FoldOutput> = (0..cv.k)
        .into_par_iter()
        .map(|fold| -> Result<FoldOutput> {
            let test_ids = assignment.subjects_in(fold);
            let mut train_set: Vec<SubjectWindows> = Vec::new();
            let mut test_set: Vec<SubjectWindows> = Vec::new();
            for (id, subject) in &by_id {
                if assignment.fold_of(id) == Some(fold) {
                    test_set.push((*subject).clone());
                } else {
                    train_set.push((*subject).clone());
                }
            }

            let (train_set, test_set, rejection_train, rejection_test) = match cv.rejection {
                RejectionMode::None => (train_set, test_set, None, None),
                RejectionMode::FitOnTrain => {
                    let criteria = fit_rejection(&train_set)?;
                    let (tr, tr_stats) = apply_rejection(&train_set, &criteria);
                    let (te, te_stats) = apply_rejection(&test_set, &criteria);
                    (tr, te, Some(tr_stats), Some(te_stats))
                }
                RejectionMode::Global => {
                    let criteria = global_criteria
                        .expect("global criteria are fit before the folds run");
                    let (tr, tr_stats) = apply_rejection(&train_set, &criteria);
                    let (te, te_stats) = apply_rejection(&test_set, &criteria);
                    (tr, te, Some(tr_stats), Some(te_stats))
                }
            };

            let mut train_rows = Vec::new();
            let mut y_train = Vec::new();
            for subject in &train_set {
                train_rows.extend(matrix_rows(subject, &cv.feature_columns));
                y_train.extend(subject.windows.iter().map(|w| w.label));
            }
            if train_rows.is_empty() {
                return Err(Error::empty(format!(
                    "fold {fold} has no training windows after rejection"
                )));
            }
            if y_train.iter().all(|&l| l == y_train[0]) {
                return Err(Error::SingleClassFold { fold });
            }
            let x_train = Matrix::from_rows(&train_rows)?;
            let model = train(&x_train, &y_train, train_config)?;

            let mut outcomes = Vec::new();
            let mut pooled_true = Vec::new();
            let mut pooled_pred = Vec::new();
            for subject in &test_set {
                let rows = matrix_rows(subject, &cv.feature_columns);
                let x = Matrix::from_rows(&rows)?;
                let y_pred = model.predict(&x, train_config.threshold)?;
                let y_true: Vec<SleepWakeLabel> =
                    subject.windows.iter().map(|w| w.label).collect();
                pooled_true.extend_from_slice(&y_true);
                pooled_pred.extend_from_slice(&y_pred);
                outcomes.push(SubjectOutcome {
                    subject_id: subject.subject_id.clone(),
                    demographics: subject.demographics,
                    fold,
                    epoch_index: subject.windows.iter().map(|w| w.epoch_index).collect(),
                    y_true,
                    y_pred,
                });
            }

            let fold_metrics = if pooled_true.is_empty() {
                MetricSet::undefined()
            } else {
                match cv.aggregation {
                    FoldAggregation::Pooled => metrics(&confusion(&pooled_true, &pooled_pred)?)?,
                    FoldAggregation::PerSubjectMean => {
                        let per: Vec<MetricSet> = outcomes
                            .iter()
                            .map(|o| o.metrics())
                            .collect::<Result<_>>()?;
                        MetricSet {
                            accuracy: mean_of_defined(per.iter().map(|m| m.accuracy)),
                            sensitivity: mean_of_defined(per.iter().map(|m| m.sensitivity)),
                            specificity: mean_of_defined(per.iter().map(|m| m.specificity)),
                            f1: mean_of_defined(per.iter().map(|m| m.f1)),
                            kappa: mean_of_defined(per.iter().map(|m| m.kappa)),
                        }
                    }
                }
            };

            Ok(FoldOutput {
                result: FoldResult {
                    fold,
                    test_subject_ids: test_ids.iter().map(|s| s.to_string()).collect(),
                    n_train_windows: y_train.len(),
                    n_test_windows: pooled_true.len(),
                    metrics: fold_metrics,
                    rejection_train,
                    rejection_test,
                },
                outcomes,
            })
        })
        .collect::<Result<Vec<FoldOutput>>>()?;

    let mut folds = Vec::with_capacity(cv.k);
    let mut subjects = Vec::new();
    for output in fold_outputs {
        folds.push(output.result);
        subjects.extend(output.outcomes);
    }
    let summary = MetricSummary {
        accuracy: summarize(&folds, |m| m.accuracy),
        sensitivity: summarize(&folds, |m| m.sensitivity),
        specificity: summarize(&folds, |m| m.specificity),
        f1: summarize(&folds, |m| m.f1),
        kappa: summarize(&folds, |m| m.kappa),
    };
    Ok(CvResult {
        assignment,
        folds,
        summary,
        subjects,
    })
}

// ---------------------------------------------------------------------------
// Stratified reporting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct StrataRow {
    pub group: String,
    /// Subjects falling in the group (defined F1 or not).
    pub subjects: usize,
    pub f1_mean: Option<f64>,
    pub f1_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrataReport {
    pub rows: Vec<StrataRow>,
}

const AGE_BINS: [(u32, u32, &str); 4] = [
    (54, 65, "age 54-65"),
    (66, 75, "age 66-75"),
    (76, 85, "age 76-85"),
    (86, u32::MAX, "age 86+"),
];

/// Mean ± std of per-subject held-out F1 for each age bin and gender;
/// subjects outside every bin land in the "other" rows.
pub fn stratified_report(subjects: &[SubjectOutcome]) -> StrataReport {
    let f1_of = |o: &SubjectOutcome| o.metrics().ok().and_then(|m| m.f1);

    let mut rows = Vec::new();
    let mut push_group = |name: &str, members: Vec<&SubjectOutcome>| {
        let f1s: Vec<f64> = members.iter().filter_map(|o| f1_of(o)).collect();
        let (f1_mean, f1_std) = if f1s.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_std(&f1s);
            (Some(m), Some(s))
        };
        rows.push(StrataRow {
            group: name.to_string(),
            subjects: members.len(),
            f1_mean,
            f1_std,
        });
    };

    for (lo, hi, name) in AGE_BINS {
        let members: Vec<&SubjectOutcome> = subjects
            .iter()
            .filter(|o| o.demographics.age >= lo && o.demographics.age <= hi)
            .collect();
        push_group(name, members);
    }
    let age_other: Vec<&SubjectOutcome> = subjects
        .iter()
        .filter(|o| o.demographics.age < AGE_BINS[0].0)
        .collect();
    push_group("age other", age_other);

    for (gender, name) in [(Gender::Male, "gender male"), (Gender::Female, "gender female")] {
        let members: Vec<&SubjectOutcome> = subjects
            .iter()
            .filter(|o| o.demographics.gender == gender)
            .collect();
        push_group(name, members);
    }
    let gender_other: Vec<&SubjectOutcome> = subjects
        .iter()
        .filter(|o| o.demographics.gender == Gender::Unspecified)
        .collect();
    push_group("gender other", gender_other);

    StrataReport { rows }
}

// ---------------------------------------------------------------------------
// Sleep-architecture summary
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SleepSummary {
    /// Total sleep time in seconds.
    pub tst_s: f64,
    /// Total wake time in seconds.
    pub wake_s: f64,
    /// Seconds before the first Sleep epoch; undefined with no sleep at all.
    pub latency_s: Option<f64>,
    /// TST divided by time in bed.
    pub efficiency: f64,
    /// Wake time after sleep onset; undefined with no sleep at all.
    pub waso_s: Option<f64>,
}

/// Summarize a sleep-wake hypnogram scored in fixed-length epochs.
pub fn sleep_summary(hypnogram: &[SleepWakeLabel], epoch_s: f64) -> Result<SleepSummary> {
    if hypnogram.is_empty() {
        return Err(Error::empty("sleep summary of an empty hypnogram"));
    }
    let n_sleep = hypnogram
        .iter()
        .filter(|&&l| l == SleepWakeLabel::Sleep)
        .count();
    let n = hypnogram.len();
    let tst_s = epoch_s * n_sleep as f64;
    let wake_s = epoch_s * (n - n_sleep) as f64;
    let onset = hypnogram.iter().position(|&l| l == SleepWakeLabel::Sleep);
    let latency_s = onset.map(|i| epoch_s * i as f64);
    let waso_s = onset.map(|i| {
        let wake_after = hypnogram[i..]
            .iter()
            .filter(|&&l| l == SleepWakeLabel::Wake)
            .count();
        epoch_s * wake_after as f64
    });
    Ok(SleepSummary {
        tst_s,
        wake_s,
        latency_s,
        efficiency: tst_s / (epoch_s * n as f64),
        waso_s,
    })
}

// ---------------------------------------------------------------------------
// Report rendering (format version 1)
// ---------------------------------------------------------------------------

/// Version tag embedded in report headers by the command-line tool.
pub const REPORT_FORMAT_VERSION: u32 = 1;

fn fmt_metric(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.6}"),
        None => "undefined".to_string(),
    }
}

fn fmt_pct(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.2}", 100.0 * v),
        None => "undefined".to_string(),
    }
}

fn fmt_seconds(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "undefined".to_string(),
    }
}

/// Per-fold metric table.
pub fn render_fold_report(result: &CvResult) -> String {
    let mut out = String::from(
        "fold,test_subjects,test_windows,accuracy,sensitivity,specificity,f1,kappa,kappa_pct\n",
    );
    for f in &result.folds {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            f.fold,
            f.test_subject_ids.len(),
            f.n_test_windows,
            fmt_metric(f.metrics.accuracy),
            fmt_metric(f.metrics.sensitivity),
            fmt_metric(f.metrics.specificity),
            fmt_metric(f.metrics.f1),
            fmt_metric(f.metrics.kappa),
            fmt_pct(f.metrics.kappa),
        ));
    }
    out
}

/// Across-fold mean ± std table; kappa appears in both scalings.
pub fn render_summary_report(result: &CvResult) -> String {
    let mut out = String::from("metric,mean,std,folds\n");
    let mut push = |name: &str, stat: Option<SummaryStat>, pct: bool| {
        let (mean, std, folds) = match stat {
            Some(s) if pct => (
                format!("{:.2}", 100.0 * s.mean),
                format!("{:.2}", 100.0 * s.std),
                s.folds.to_string(),
            ),
            Some(s) => (format!("{:.6}", s.mean), format!("{:.6}", s.std), s.folds.to_string()),
            None => (
                "undefined".to_string(),
                "undefined".to_string(),
                "0".to_string(),
            ),
        };
        out.push_str(&format!("{name},{mean},{std},{folds}\n"));
    };
    push("accuracy", result.summary.accuracy, false);
    push("sensitivity", result.summary.sensitivity, false);
    push("specificity", result.summary.specificity, false);
    push("f1", result.summary.f1, false);
    push("kappa", result.summary.kappa, false);
    push("kappa_pct", result.summary.kappa, true);
    out
}

/// Stratified per-group F1 table.
pub fn render_strata_report(report: &StrataReport) -> String {
    let mut out = String::from("group,subjects,f1_mean,f1_std\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.group,
            row.subjects,
            fmt_metric(row.f1_mean),
            fmt_metric(row.f1_std),
        ));
    }
    out
}

/// Per-subject true-vs-predicted sleep architecture table.
pub fn render_sleep_report(subjects: &[SubjectOutcome], epoch_s: f64) -> Result<String> {
    let mut out = String::from(
        "subject_id,tst_true_s,tst_pred_s,latency_true_s,latency_pred_s,\
         efficiency_true,efficiency_pred,waso_true_s,waso_pred_s\n",
    );
    for subject in subjects {
        let truth = sleep_summary(&subject.y_true, epoch_s)?;
        let pred = sleep_summary(&subject.y_pred, epoch_s)?;
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6},{},{}\n",
            subject.subject_id,
            truth.tst_s,
            pred.tst_s,
            fmt_seconds(truth.latency_s),
            fmt_seconds(pred.latency_s),
            truth.efficiency,
            pred.efficiency,
            fmt_seconds(truth.waso_s),
            fmt_seconds(pred.waso_s),
        ));
    }
    Ok(out)
}
