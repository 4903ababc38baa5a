//! Library-level integration: synthesize a cohort in memory, extract epoch
//! features, and cross-validate, checking the quality floors that the full
//! pipeline is expected to clear with a wide margin.

use sleepwake_core::evaluate::{cross_validate, CvConfig};
use sleepwake_core::features::{extract_subject, reject_windows, SubjectWindows};
use sleepwake_core::learn::{ModelKind, TrainConfig};
use sleepwake_core::model::COL_ACT;
use sleepwake_core::preprocess::PreprocessConfig;
use sleepwake_core::synth::{generate_subject, SynthParams};

fn extracted_cohort(params: &SynthParams) -> Vec<SubjectWindows> {
    let preprocess = PreprocessConfig::default();
    (0..params.subjects)
        .map(|i| {
            let (record, _) = generate_subject(params, i).unwrap();
            extract_subject(&record, &preprocess).unwrap()
        })
        .collect()
}

#[test]
fn cohort_pipeline_classifies_accurately_and_rejection_stays_rare() {
    let params = SynthParams {
        subjects: 12,
        epochs: 40,
        seed: 7,
        ..SynthParams::default()
    };
    let cohort = extracted_cohort(&params);

    // Nearly every epoch yields a defined window at the default 20 dB SNR.
    let windows: usize = cohort.iter().map(|s| s.windows.len()).sum();
    let undefined: usize = cohort.iter().map(|s| s.stats.undefined_windows).sum();
    assert_eq!(windows + undefined, 12 * 40);
    assert!(windows >= 470, "only {windows} defined windows");

    // Artifact rejection trims a small fraction and never drops a subject.
    let (_, stats) = reject_windows(&cohort).unwrap();
    let dropped = stats.windows_before - stats.retained;
    assert!(
        (dropped as f64) < 0.05 * stats.windows_before as f64,
        "rejection dropped {dropped} of {} windows",
        stats.windows_before
    );
    assert_eq!(stats.subjects_dropped, 0);

    // Full-feature boosting scores high under grouped CV with per-fold
    // rejection fitting (the defaults).
    let gbdt = TrainConfig::default();
    assert_eq!(gbdt.kind, ModelKind::Gbdt);
    let cv = CvConfig {
        k: 4,
        ..CvConfig::default()
    };
    let full = cross_validate(&cohort, &gbdt, &cv).unwrap();
    let f1 = full.summary.f1.unwrap().mean;
    let kappa = full.summary.kappa.unwrap().mean;
    assert!(f1 > 0.95, "gbdt F1 {f1:.4}");
    assert!(kappa > 0.9, "gbdt kappa {kappa:.4}");
    for fold in &full.folds {
        assert!(
            fold.rejection_train.is_some(),
            "per-fold rejection bookkeeping missing"
        );
    }

    // An activity-only linear baseline trails by a wide margin, which is
    // what makes the pulse-derived features worth extracting.
    let logistic = TrainConfig {
        kind: ModelKind::Logistic,
        ..TrainConfig::default()
    };
    let act_cv = CvConfig {
        k: 4,
        feature_columns: vec![COL_ACT],
        ..CvConfig::default()
    };
    let baseline = cross_validate(&cohort, &logistic, &act_cv).unwrap();
    let kappa_act = baseline.summary.kappa.unwrap().mean;
    assert!(
        kappa - kappa_act >= 0.15,
        "full-feature kappa {kappa:.4} vs activity-only {kappa_act:.4}"
    );
}
