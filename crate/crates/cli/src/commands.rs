//! Subcommand implementations. Each resolves its settings flag-first, then
//! from the config file, then from built-in defaults; runs the core
//! pipeline; and writes digest-stamped reports plus a short stdout summary.

use std::fmt::Display;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use sleepwake_core::evaluate::{
    cross_validate, render_fold_report, render_sleep_report, render_strata_report,
    render_summary_report, stratified_report, CvConfig, FoldAggregation, RejectionMode,
    SummaryStat,
};
use sleepwake_core::features::{extract_subject, reject_windows, RejectionStats, SubjectWindows};
use sleepwake_core::ingest::{
    load_subject, read_feature_set, read_manifest, write_feature_set, FEATURE_SET_MANIFEST,
};
use sleepwake_core::learn::{ModelKind, TrainConfig};
use sleepwake_core::model::{COL_ACT, COL_HR, COL_HRV, EPOCH_SECONDS};
use sleepwake_core::preprocess::PreprocessConfig;
use sleepwake_core::synth::{generate_cohort, SynthParams};
use sleepwake_core::Error;

use crate::config::{data_root, parse_bool, FileConfig};
use crate::report::{digest_files, kv, ReportContext};
use crate::{Cli, CliError, CliResult, Command, EvaluateArgs, FeaturesArgs, SynthArgs};

pub fn dispatch(cli: Cli) -> CliResult<()> {
    let config = FileConfig::load(cli.config.as_deref())?;
    if let Some(jobs) = config.opt(cli.jobs, "jobs")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::usage(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Synth(args) => run_synth(args, &config),
        Command::Features(args) => run_features(args, &config),
        Command::Evaluate(args) => run_evaluate(args, &config),
    }
}

/// Invalid user-supplied parameter values are usage errors (exit 2), not
/// pipeline failures.
fn usage_if_invalid(e: Error) -> CliError {
    match e {
        Error::InvalidHyperparameter { .. } => CliError::Usage(e.to_string()),
        other => CliError::Core(other),
    }
}

fn missing(what: &str, key: &str) -> CliError {
    CliError::Usage(format!(
        "{what}: pass --{key} or set `{key}` in the config file"
    ))
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn run_synth(args: SynthArgs, config: &FileConfig) -> CliResult<()> {
    let out = config
        .path(args.out, "out")
        .ok_or_else(|| missing("synth needs an output directory", "out"))?;
    let defaults = SynthParams::default();
    let params = SynthParams {
        seed: config.get(args.seed, "seed", defaults.seed)?,
        subjects: config.get(args.subjects, "subjects", defaults.subjects)?,
        epochs: config.get(args.epochs, "epochs", defaults.epochs)?,
        snr_db: config.get(args.snr_db, "snr-db", defaults.snr_db)?,
        ..defaults
    };
    params.validate().map_err(usage_if_invalid)?;

    let summary = generate_cohort(&params, &out)?;
    if summary.subjects == 0 {
        eprintln!("warning: zero subjects requested; wrote an empty dataset manifest");
    }
    println!(
        "synth: {} subjects x {} epochs (sleep fraction {:.3}) -> {}",
        summary.subjects,
        summary.epochs_per_subject,
        summary.sleep_fraction,
        summary.manifest_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

fn run_features(args: FeaturesArgs, config: &FileConfig) -> CliResult<()> {
    let data = config
        .path(args.data, "data")
        .or_else(|| data_root().map(|root| root.join("manifest.csv")))
        .ok_or_else(|| {
            CliError::Usage(
                "features needs a dataset manifest: pass --data <FILE>, set `data` in the \
                 config file, or set SLEEPWAKE_DATA_ROOT"
                    .to_string(),
            )
        })?;
    let out = config
        .path(args.out, "out")
        .ok_or_else(|| missing("features needs an output directory", "out"))?;
    let fold_frozen = match config.opt(args.fold_frozen_rejection, "fold-frozen-rejection")? {
        Some(raw) => parse_bool("--fold-frozen-rejection", &raw)?,
        None => true,
    };

    let manifest = read_manifest(&data)?;
    let mut inputs = vec![manifest.path.clone()];
    for entry in &manifest.entries {
        inputs.push(entry.ppg.clone());
        inputs.push(entry.activity.clone());
        inputs.push(entry.labels.clone());
    }
    let dataset_digest = digest_files(&inputs)?;

    let preprocess = PreprocessConfig::default();
    let cohort: Vec<SubjectWindows> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let record = load_subject(entry)?;
            extract_subject(&record, &preprocess)
        })
        .collect::<sleepwake_core::Result<_>>()?;

    // Fit-and-apply statistics are always computed so the report can state
    // what a global pass drops (or would drop, when rejection is deferred
    // to the per-fold evaluation protocol).
    let (rejected_cohort, stats) = if cohort.is_empty() {
        (Vec::new(), None)
    } else {
        let (kept, stats) = reject_windows(&cohort)?;
        (kept, Some(stats))
    };
    let applied = !fold_frozen;
    let written: Vec<SubjectWindows> = if applied {
        rejected_cohort
    } else {
        // Subjects with no defined windows have nothing to defer and cannot
        // be tabulated; everything else is written untouched.
        cohort
            .iter()
            .filter(|s| !s.windows.is_empty())
            .cloned()
            .collect()
    };
    let set_manifest = write_feature_set(&out, &written, applied)?;

    let ctx = ReportContext {
        command: "features",
        dataset_digest,
        config: vec![kv("fold-frozen-rejection", fold_frozen)],
    };
    let body = rejection_body(&cohort, stats.as_ref(), applied, written.len());
    ctx.write_report(&out.join("rejection.csv"), &body)?;

    if manifest.entries.is_empty() {
        eprintln!(
            "warning: dataset manifest {} lists no subjects; wrote an empty feature set",
            data.display()
        );
    }
    let extracted: usize = cohort.iter().map(|s| s.windows.len()).sum();
    let (dropped, retained) = match &stats {
        Some(s) => (s.dropped_hr + s.dropped_hrv, s.retained),
        None => (0, 0),
    };
    println!(
        "features: {} subjects, {} windows extracted; rejection {} ({} dropped, {} retained) \
         -> {}",
        cohort.len(),
        extracted,
        if applied { "applied" } else { "deferred" },
        dropped,
        retained,
        set_manifest.display()
    );
    Ok(())
}

/// `statistic,value` body of the rejection report. When the cohort is empty
/// there are no statistics to fit, so criterion rows read `undefined`.
fn rejection_body(
    cohort: &[SubjectWindows],
    stats: Option<&RejectionStats>,
    applied: bool,
    subjects_written: usize,
) -> String {
    fn line(out: &mut String, key: &str, value: impl Display) {
        let _ = writeln!(out, "{key},{value}");
    }

    let epochs: usize = cohort.iter().map(|s| s.stats.epochs).sum();
    let unscored: usize = cohort.iter().map(|s| s.stats.unscored_epochs).sum();
    let undefined: usize = cohort.iter().map(|s| s.stats.undefined_windows).sum();
    let extracted: usize = cohort.iter().map(|s| s.windows.len()).sum();

    let mut out = String::from("statistic,value\n");
    line(&mut out, "subjects", cohort.len());
    line(&mut out, "epochs_labelled", epochs);
    line(&mut out, "epochs_unscored", unscored);
    line(&mut out, "windows_undefined", undefined);
    line(&mut out, "windows_extracted", extracted);
    match stats {
        Some(s) => {
            line(&mut out, "windows_dropped_hr_rule", s.dropped_hr);
            line(&mut out, "windows_dropped_hrv_rule", s.dropped_hrv);
            line(&mut out, "windows_retained", s.retained);
            line(&mut out, "subjects_dropped", s.subjects_dropped);
            line(&mut out, "criterion_hr_max_bpm", s.criteria.hr_max_bpm);
            line(&mut out, "criterion_hrv_mean_s", s.criteria.hrv_mean_s);
            line(&mut out, "criterion_hrv_std_s", s.criteria.hrv_std_s);
            line(&mut out, "criterion_hrv_band_sigmas", s.criteria.band_sigmas);
        }
        None => {
            for key in [
                "windows_dropped_hr_rule",
                "windows_dropped_hrv_rule",
                "windows_retained",
                "subjects_dropped",
                "criterion_hr_max_bpm",
                "criterion_hrv_mean_s",
                "criterion_hrv_std_s",
                "criterion_hrv_band_sigmas",
            ] {
                line(&mut out, key, "undefined");
            }
        }
    }
    line(&mut out, "subjects_written", subjects_written);
    line(&mut out, "rejection", if applied { "applied" } else { "deferred" });
    out
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn run_evaluate(args: EvaluateArgs, config: &FileConfig) -> CliResult<()> {
    let features_manifest = config
        .path(args.features, "features")
        .or_else(|| data_root().map(|root| root.join("features").join(FEATURE_SET_MANIFEST)))
        .ok_or_else(|| {
            CliError::Usage(
                "evaluate needs a feature-set manifest: pass --features <FILE>, set `features` \
                 in the config file, or set SLEEPWAKE_DATA_ROOT"
                    .to_string(),
            )
        })?;
    let report_dir = config
        .path(args.report_dir, "report-dir")
        .ok_or_else(|| missing("evaluate needs a report directory", "report-dir"))?;

    let model_name = config.get(args.model, "model", "gbdt".to_string())?;
    let kind = ModelKind::from_str(&model_name).map_err(usage_if_invalid)?;
    let k = config.get(args.k, "k", CvConfig::default().k)?;
    let seed = config.get(args.seed, "seed", 0)?;
    let feature_set_name = config.get(args.feature_set, "feature-set", "all".to_string())?;
    let feature_columns = match feature_set_name.as_str() {
        "all" => vec![COL_HR, COL_HRV, COL_ACT],
        "act-only" => vec![COL_ACT],
        other => {
            return Err(CliError::Usage(format!(
                "--feature-set: expected `all` or `act-only`, got `{other}`"
            )))
        }
    };

    let defaults = TrainConfig::default();
    let mut train = TrainConfig {
        kind,
        seed,
        threshold: config.get(args.threshold, "threshold", defaults.threshold)?,
        positive_weight: config.get(
            args.positive_weight,
            "positive-weight",
            defaults.positive_weight,
        )?,
        ..defaults
    };
    if let Some(v) = config.opt(args.lambda, "lambda")? {
        train.logistic.lambda = v;
    }
    if let Some(v) = config.opt(args.max_iterations, "max-iterations")? {
        train.logistic.max_iterations = v;
    }
    if let Some(v) = config.opt(args.trees, "trees")? {
        train.forest.n_trees = v;
    }
    if let Some(v) = config.opt(args.mtry, "mtry")? {
        train.forest.mtry = v;
    }
    if let Some(v) = config.opt(args.min_leaf, "min-leaf")? {
        train.forest.min_leaf = v;
    }
    if let Some(v) = config.opt(args.rounds, "rounds")? {
        train.gbdt.n_rounds = v;
    }
    if let Some(v) = config.opt(args.max_depth, "max-depth")? {
        train.gbdt.max_depth = v;
    }
    if let Some(v) = config.opt(args.learning_rate, "learning-rate")? {
        train.gbdt.learning_rate = v;
    }
    if let Some(v) = config.opt(args.reg_lambda, "reg-lambda")? {
        train.gbdt.lambda = v;
    }
    if let Some(v) = config.opt(args.gamma, "gamma")? {
        train.gbdt.gamma = v;
    }
    if let Some(v) = config.opt(args.min_child_weight, "min-child-weight")? {
        train.gbdt.min_child_weight = v;
    }
    train.validate().map_err(usage_if_invalid)?;

    let set = read_feature_set(&features_manifest)?;
    let mut inputs = vec![features_manifest.clone()];
    inputs.extend(set.table_paths.iter().cloned());
    let dataset_digest = digest_files(&inputs)?;

    let rejection = if set.rejection_applied {
        RejectionMode::None
    } else {
        RejectionMode::FitOnTrain
    };
    let cv = CvConfig {
        k,
        seed,
        rejection,
        feature_columns,
        aggregation: FoldAggregation::Pooled,
    };
    let result = cross_validate(&set.subjects, &train, &cv)?;

    let mut echo = vec![
        kv("model", kind.as_str()),
        kv("k", k),
        kv("seed", seed),
        kv("threshold", train.threshold),
        kv("positive-weight", train.positive_weight),
        kv("feature-set", &feature_set_name),
        kv("rejection", if set.rejection_applied { "applied" } else { "deferred" }),
    ];
    match kind {
        ModelKind::Logistic => {
            echo.push(kv("lambda", train.logistic.lambda));
            echo.push(kv("max-iterations", train.logistic.max_iterations));
        }
        ModelKind::RandomForest => {
            echo.push(kv("trees", train.forest.n_trees));
            echo.push(kv("mtry", train.forest.mtry));
            echo.push(kv("min-leaf", train.forest.min_leaf));
        }
        ModelKind::Gbdt => {
            echo.push(kv("rounds", train.gbdt.n_rounds));
            echo.push(kv("max-depth", train.gbdt.max_depth));
            echo.push(kv("learning-rate", train.gbdt.learning_rate));
            echo.push(kv("reg-lambda", train.gbdt.lambda));
            echo.push(kv("gamma", train.gbdt.gamma));
            echo.push(kv("min-child-weight", train.gbdt.min_child_weight));
        }
    }

    std::fs::create_dir_all(&report_dir).map_err(|e| Error::io(&report_dir, e))?;
    let ctx = ReportContext {
        command: "evaluate",
        dataset_digest,
        config: echo,
    };
    ctx.write_report(&report_dir.join("folds.csv"), &render_fold_report(&result))?;
    ctx.write_report(&report_dir.join("summary.csv"), &render_summary_report(&result))?;
    ctx.write_report(
        &report_dir.join("strata.csv"),
        &render_strata_report(&stratified_report(&result.subjects)),
    )?;
    ctx.write_report(
        &report_dir.join("sleep.csv"),
        &render_sleep_report(&result.subjects, EPOCH_SECONDS)?,
    )?;

    let n_windows: usize = set.subjects.iter().map(|s| s.windows.len()).sum();
    println!(
        "evaluate: {} | {}-fold grouped CV | {} subjects, {} windows | rejection {}",
        kind.as_str(),
        k,
        set.subjects.len(),
        n_windows,
        if set.rejection_applied {
            "pre-applied"
        } else {
            "fit on each training split"
        },
    );
    print_metric("accuracy", result.summary.accuracy);
    print_metric("sensitivity", result.summary.sensitivity);
    print_metric("specificity", result.summary.specificity);
    print_metric("f1", result.summary.f1);
    print_metric("kappa", result.summary.kappa);
    println!("reports: {}", report_dir.display());
    Ok(())
}

fn print_metric(name: &str, stat: Option<SummaryStat>) {
    match stat {
        Some(s) => println!("  {name:<12} {:.4} +/- {:.4}  ({} folds)", s.mean, s.std, s.folds),
        None => println!("  {name:<12} undefined in every fold"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejection_body_covers_both_modes_with_fixed_keys() {
        let body = rejection_body(&[], None, false, 0);
        let keys: Vec<&str> = body
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(
            keys,
            [
                "subjects",
                "epochs_labelled",
                "epochs_unscored",
                "windows_undefined",
                "windows_extracted",
                "windows_dropped_hr_rule",
                "windows_dropped_hrv_rule",
                "windows_retained",
                "subjects_dropped",
                "criterion_hr_max_bpm",
                "criterion_hrv_mean_s",
                "criterion_hrv_std_s",
                "criterion_hrv_band_sigmas",
                "subjects_written",
                "rejection",
            ]
        );
        assert!(body.contains("rejection,deferred"));
        assert!(body.contains("criterion_hr_max_bpm,undefined"));

        let body = rejection_body(&[], None, true, 0);
        assert!(body.contains("rejection,applied"));
    }
}
