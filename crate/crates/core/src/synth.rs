//! Synthetic cohort generator with exact ground truth.
//!
//! Each subject is produced from an independent, deterministically derived
//! RNG, in five steps:
//!
//! 1. a two-state wake/sleep Markov chain emits one stage per 30 s epoch,
//!    started from its stationary distribution;
//! 2. every epoch draws a target heart rate from its stage's normal
//!    distribution (clamped to a physiological band), and beat times are laid
//!    down with per-beat Gaussian inter-beat jitter (clamped to plausible
//!    inter-beat intervals);
//! 3. a fixed two-lobe pulse template — a systolic Gaussian plus a smaller,
//!    delayed dicrotic Gaussian — is rendered at every beat time;
//! 4. white Gaussian noise is added to reach the requested SNR
//!    (an infinite `snr_db` means a noise-free signal);
//! 5. activity counts are drawn per epoch from stage-conditional mixtures:
//!    mostly-zero small values during sleep, heavy-tailed log-normal counts
//!    during wake.
//!
//! Sleep epochs are textured into N1/N2/N3/REM labels so datasets exercise
//! the full five-stage label surface; the binary chain state is kept as the
//! scoring truth in the sidecar.
//!
//! Determinism: subject `i` of a cohort seeded with `s` depends only on
//! `(s, i)` — subjects are generated from split seeds, never from a shared
//! stream — so cohorts are reproducible byte for byte and individual
//! subjects can be regenerated in isolation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};

use crate::error::{Error, Result};
use crate::ingest;
use crate::model::{
    epoch_samples, ActivitySeries, Demographics, Gender, PpgRecord, SleepWakeLabel, StageLabel,
    SubjectRecord, EPOCH_SECONDS,
};
use crate::seeds::child_seed;

/// Heart-rate targets are clamped to this band (bpm).
pub const HR_CLAMP_BPM: (f64, f64) = (35.0, 130.0);
/// Individual inter-beat intervals are clamped to this band (seconds).
pub const IBI_CLAMP_S: (f64, f64) = (0.55, 2.0);

/// Cumulative probabilities texturing a sleep epoch into N1 / N2 / N3 / REM.
const SLEEP_TEXTURE_CDF: [(f64, StageLabel); 4] = [
    (0.10, StageLabel::N1),
    (0.60, StageLabel::N2),
    (0.85, StageLabel::N3),
    (1.0, StageLabel::Rem),
];

/// Sampled age range, inclusive (years).
const AGE_RANGE: (u32, u32) = (54, 90);

/// Every distribution parameter of the generator. All of it is recorded in
/// the cohort's ground-truth sidecar so a dataset is self-describing.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// Master seed; all per-subject randomness derives from it.
    pub seed: u64,
    pub subjects: usize,
    /// Epochs (30 s each) per subject.
    pub epochs: usize,
    /// PPG sampling rate.
    pub fs_hz: f64,
    /// Target signal-to-noise ratio in dB; `f64::INFINITY` disables noise.
    pub snr_db: f64,

    // Wake/sleep Markov chain.
    pub p_wake_to_sleep: f64,
    pub p_sleep_to_wake: f64,

    // Stage-conditional heart rate (bpm).
    pub hr_wake_mean_bpm: f64,
    pub hr_wake_std_bpm: f64,
    pub hr_sleep_mean_bpm: f64,
    pub hr_sleep_std_bpm: f64,

    // Per-beat inter-beat-interval jitter (seconds).
    pub ibi_jitter_wake_s: f64,
    pub ibi_jitter_sleep_s: f64,

    // Pulse template: unit-amplitude systolic Gaussian plus a delayed
    // dicrotic Gaussian.
    pub template_systolic_sigma_s: f64,
    pub template_dicrotic_sigma_s: f64,
    pub template_dicrotic_delay_s: f64,
    pub template_dicrotic_amp: f64,

    // Stage-conditional activity counts.
    pub act_wake_zero_prob: f64,
    pub act_sleep_zero_prob: f64,
    pub act_wake_lognorm_mu: f64,
    pub act_wake_lognorm_sigma: f64,
    pub act_sleep_exp_mean: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 0,
            subjects: 50,
            epochs: 120,
            fs_hz: 256.0,
            snr_db: 20.0,
            p_wake_to_sleep: 0.25,
            p_sleep_to_wake: 0.13,
            hr_wake_mean_bpm: 75.0,
            hr_wake_std_bpm: 8.0,
            hr_sleep_mean_bpm: 58.0,
            hr_sleep_std_bpm: 5.0,
            ibi_jitter_wake_s: 0.08,
            ibi_jitter_sleep_s: 0.04,
            template_systolic_sigma_s: 0.09,
            template_dicrotic_sigma_s: 0.12,
            template_dicrotic_delay_s: 0.30,
            template_dicrotic_amp: 0.35,
            act_wake_zero_prob: 0.15,
            act_sleep_zero_prob: 0.80,
            act_wake_lognorm_mu: 1.6,
            act_wake_lognorm_sigma: 0.7,
            act_sleep_exp_mean: 2.0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| -> Result<()> {
            if p.is_finite() && (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidHyperparameter {
                    name: name.to_string(),
                    message: format!("probability must lie in [0, 1], got {p}"),
                })
            }
        };
        let nonneg = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidHyperparameter {
                    name: name.to_string(),
                    message: format!("must be finite and non-negative, got {v}"),
                })
            }
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidHyperparameter {
                    name: name.to_string(),
                    message: format!("must be finite and positive, got {v}"),
                })
            }
        };
        let hr = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 30.0 && v < 180.0 {
                Ok(())
            } else {
                Err(Error::InvalidHyperparameter {
                    name: name.to_string(),
                    message: format!("heart-rate mean must lie in (30, 180) bpm, got {v}"),
                })
            }
        };
        if self.epochs == 0 {
            return Err(Error::InvalidHyperparameter {
                name: "epochs".into(),
                message: "at least one epoch per subject is required".into(),
            });
        }
        positive("fs_hz", self.fs_hz)?;
        if self.snr_db.is_nan() {
            return Err(Error::InvalidHyperparameter {
                name: "snr_db".into(),
                message: "must not be NaN".into(),
            });
        }
        prob("p_wake_to_sleep", self.p_wake_to_sleep)?;
        prob("p_sleep_to_wake", self.p_sleep_to_wake)?;
        hr("hr_wake_mean_bpm", self.hr_wake_mean_bpm)?;
        hr("hr_sleep_mean_bpm", self.hr_sleep_mean_bpm)?;
        nonneg("hr_wake_std_bpm", self.hr_wake_std_bpm)?;
        nonneg("hr_sleep_std_bpm", self.hr_sleep_std_bpm)?;
        nonneg("ibi_jitter_wake_s", self.ibi_jitter_wake_s)?;
        nonneg("ibi_jitter_sleep_s", self.ibi_jitter_sleep_s)?;
        positive("template_systolic_sigma_s", self.template_systolic_sigma_s)?;
        positive("template_dicrotic_sigma_s", self.template_dicrotic_sigma_s)?;
        nonneg("template_dicrotic_delay_s", self.template_dicrotic_delay_s)?;
        prob("template_dicrotic_amp", self.template_dicrotic_amp)?;
        prob("act_wake_zero_prob", self.act_wake_zero_prob)?;
        prob("act_sleep_zero_prob", self.act_sleep_zero_prob)?;
        if !self.act_wake_lognorm_mu.is_finite() {
            return Err(Error::InvalidHyperparameter {
                name: "act_wake_lognorm_mu".into(),
                message: "must be finite".into(),
            });
        }
        positive("act_wake_lognorm_sigma", self.act_wake_lognorm_sigma)?;
        positive("act_sleep_exp_mean", self.act_sleep_exp_mean)?;
        Ok(())
    }

    /// Stationary probability of the sleep state. When both transition
    /// probabilities are zero the chain never moves; 1/2 is used so the
    /// initial draw stays unbiased.
    pub fn stationary_sleep_probability(&self) -> f64 {
        let total = self.p_wake_to_sleep + self.p_sleep_to_wake;
        if total == 0.0 {
            0.5
        } else {
            self.p_wake_to_sleep / total
        }
    }
}

/// Exact generation record for one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectTruth {
    pub subject_id: String,
    /// Every rendered beat time, strictly increasing, in seconds.
    pub beat_times_s: Vec<f64>,
    /// The binary chain state per epoch (scoring truth).
    pub stages: Vec<SleepWakeLabel>,
}

/// Canonical id of cohort subject `index`.
pub fn subject_id_for(index: usize) -> String {
    format!("s{index:03}")
}

// Independent per-aspect RNG streams. Splitting by aspect keeps, say, the
// noise stream unaffected by how many beats an earlier epoch produced.
const STREAM_DEMOGRAPHICS: u64 = 0;
const STREAM_STAGES: u64 = 1;
const STREAM_HR: u64 = 2;
const STREAM_BEATS: u64 = 3;
const STREAM_ACTIVITY: u64 = 4;
const STREAM_NOISE: u64 = 5;
const STREAM_TEXTURE: u64 = 6;

fn stream_rng(subject_seed: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(child_seed(subject_seed, stream))
}

fn sample_binary_stages(params: &SynthParams, rng: &mut ChaCha12Rng) -> Vec<SleepWakeLabel> {
    let mut stages = Vec::with_capacity(params.epochs);
    let mut asleep = rng.random::<f64>() < params.stationary_sleep_probability();
    stages.push(label(asleep));
    for _ in 1..params.epochs {
        let flip = if asleep {
            params.p_sleep_to_wake
        } else {
            params.p_wake_to_sleep
        };
        if rng.random::<f64>() < flip {
            asleep = !asleep;
        }
        stages.push(label(asleep));
    }
    stages
}

fn label(asleep: bool) -> SleepWakeLabel {
    if asleep {
        SleepWakeLabel::Sleep
    } else {
        SleepWakeLabel::Wake
    }
}

fn texture_stages(binary: &[SleepWakeLabel], rng: &mut ChaCha12Rng) -> Vec<StageLabel> {
    binary
        .iter()
        .map(|stage| match stage {
            SleepWakeLabel::Wake => StageLabel::Wake,
            SleepWakeLabel::Sleep => {
                let u = rng.random::<f64>();
                SLEEP_TEXTURE_CDF
                    .iter()
                    .find(|(cum, _)| u < *cum)
                    .map(|(_, s)| *s)
                    .unwrap_or(StageLabel::Rem)
            }
        })
        .collect()
}

/// Draw from a normal distribution, treating zero spread as a constant.
fn normal_draw(rng: &mut ChaCha12Rng, mean: f64, std: f64) -> f64 {
    if std > 0.0 {
        Normal::new(mean, std)
            .expect("validated normal parameters")
            .sample(rng)
    } else {
        mean
    }
}

fn hr_targets(params: &SynthParams, stages: &[SleepWakeLabel], rng: &mut ChaCha12Rng) -> Vec<f64> {
    stages
        .iter()
        .map(|stage| {
            let (mean, std) = match stage {
                SleepWakeLabel::Wake => (params.hr_wake_mean_bpm, params.hr_wake_std_bpm),
                SleepWakeLabel::Sleep => (params.hr_sleep_mean_bpm, params.hr_sleep_std_bpm),
            };
            normal_draw(rng, mean, std).clamp(HR_CLAMP_BPM.0, HR_CLAMP_BPM.1)
        })
        .collect()
}

fn beat_times(
    params: &SynthParams,
    stages: &[SleepWakeLabel],
    hr_bpm: &[f64],
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let duration = stages.len() as f64 * EPOCH_SECONDS;
    let mut beats = Vec::with_capacity((duration * 2.2) as usize);
    let mut t = rng.random_range(0.2..1.0) * (60.0 / hr_bpm[0]);
    while t < duration {
        beats.push(t);
        let epoch = ((t / EPOCH_SECONDS) as usize).min(stages.len() - 1);
        let jitter = match stages[epoch] {
            SleepWakeLabel::Wake => params.ibi_jitter_wake_s,
            SleepWakeLabel::Sleep => params.ibi_jitter_sleep_s,
        };
        let ibi = normal_draw(rng, 60.0 / hr_bpm[epoch], jitter).clamp(IBI_CLAMP_S.0, IBI_CLAMP_S.1);
        t += ibi;
    }
    beats
}

fn activity_counts(
    params: &SynthParams,
    stages: &[SleepWakeLabel],
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let wake_dist = LogNormal::new(params.act_wake_lognorm_mu, params.act_wake_lognorm_sigma)
        .expect("validated log-normal parameters");
    let sleep_dist = Exp::new(1.0 / params.act_sleep_exp_mean).expect("validated exponential rate");
    stages
        .iter()
        .map(|stage| match stage {
            SleepWakeLabel::Wake => {
                if rng.random::<f64>() < params.act_wake_zero_prob {
                    0.0
                } else {
                    wake_dist.sample(rng)
                }
            }
            SleepWakeLabel::Sleep => {
                if rng.random::<f64>() < params.act_sleep_zero_prob {
                    0.0
                } else {
                    sleep_dist.sample(rng)
                }
            }
        })
        .collect()
}

/// Render the noise-free pulse train: one template instance per beat.
fn render_clean(params: &SynthParams, beats: &[f64], n_samples: usize) -> Vec<f64> {
    let fs = params.fs_hz;
    let s1 = params.template_systolic_sigma_s;
    let s2 = params.template_dicrotic_sigma_s;
    let delay = params.template_dicrotic_delay_s;
    let amp2 = params.template_dicrotic_amp;
    let lead = 4.0 * s1;
    let tail = delay + 4.0 * s2;
    let mut signal = vec![0.0; n_samples];
    for &tb in beats {
        let lo = (((tb - lead) * fs).ceil().max(0.0)) as usize;
        let hi = (((tb + tail) * fs).floor() as usize).min(n_samples.saturating_sub(1));
        for (i, slot) in signal.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let dt = i as f64 / fs - tb;
            let systolic = (-dt * dt / (2.0 * s1 * s1)).exp();
            let dd = dt - delay;
            let dicrotic = amp2 * (-dd * dd / (2.0 * s2 * s2)).exp();
            *slot += systolic + dicrotic;
        }
    }
    signal
}

fn add_noise(params: &SynthParams, signal: &mut [f64], rng: &mut ChaCha12Rng) {
    if params.snr_db.is_infinite() && params.snr_db > 0.0 {
        return;
    }
    let rms = (signal.iter().map(|x| x * x).sum::<f64>() / signal.len() as f64).sqrt();
    if rms == 0.0 {
        return;
    }
    let noise_std = rms * 10f64.powf(-params.snr_db / 20.0);
    for slot in signal.iter_mut() {
        *slot += normal_draw(rng, 0.0, noise_std);
    }
}

/// Generate cohort subject `index`. The result depends only on
/// `(params, index)`.
pub fn generate_subject(
    params: &SynthParams,
    index: usize,
) -> Result<(SubjectRecord, SubjectTruth)> {
    params.validate()?;
    let subject_id = subject_id_for(index);
    let subject_seed = child_seed(params.seed, index as u64);

    let mut demo_rng = stream_rng(subject_seed, STREAM_DEMOGRAPHICS);
    let age = demo_rng.random_range(AGE_RANGE.0..=AGE_RANGE.1);
    let gender = if demo_rng.random::<bool>() {
        Gender::Male
    } else {
        Gender::Female
    };
    let demographics = Demographics { age, gender };

    let binary = sample_binary_stages(params, &mut stream_rng(subject_seed, STREAM_STAGES));
    let stage_labels = texture_stages(&binary, &mut stream_rng(subject_seed, STREAM_TEXTURE));
    let hr = hr_targets(params, &binary, &mut stream_rng(subject_seed, STREAM_HR));
    let beats = beat_times(params, &binary, &hr, &mut stream_rng(subject_seed, STREAM_BEATS));
    let counts = activity_counts(params, &binary, &mut stream_rng(subject_seed, STREAM_ACTIVITY));

    let n_samples = params.epochs * epoch_samples(params.fs_hz);
    let mut signal = render_clean(params, &beats, n_samples);
    add_noise(params, &mut signal, &mut stream_rng(subject_seed, STREAM_NOISE));

    let ppg = PpgRecord::new(subject_id.clone(), params.fs_hz, signal)?;
    let activity = ActivitySeries::new(counts)?;
    let record = SubjectRecord::new(demographics, ppg, activity, stage_labels)?;
    let truth = SubjectTruth {
        subject_id,
        beat_times_s: beats,
        stages: binary,
    };
    Ok((record, truth))
}

// ---------------------------------------------------------------------------
// Cohort emission
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSummary {
    pub subjects: usize,
    pub epochs_per_subject: usize,
    /// Fraction of sleep epochs in the binary truth across the cohort;
    /// zero for an empty cohort.
    pub sleep_fraction: f64,
    pub manifest_path: PathBuf,
}

fn write_truth_beats(path: &Path, truth: &SubjectTruth) -> Result<()> {
    let mut out = String::with_capacity(truth.beat_times_s.len() * 20 + 64);
    let _ = writeln!(out, "# subject_id={}", truth.subject_id);
    out.push_str("beat_time_s\n");
    for t in &truth.beat_times_s {
        let _ = writeln!(out, "{t}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_truth_stages(path: &Path, truth: &SubjectTruth) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# subject_id={}", truth.subject_id);
    out.push_str("epoch,stage\n");
    for (epoch, stage) in truth.stages.iter().enumerate() {
        let _ = writeln!(out, "{epoch},{}", stage.as_str());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_truth_params(path: &Path, params: &SynthParams) -> Result<()> {
    let mut out = String::from("key,value\n");
    let p = params;
    let rows: &[(&str, String)] = &[
        ("seed", p.seed.to_string()),
        ("subjects", p.subjects.to_string()),
        ("epochs", p.epochs.to_string()),
        ("fs_hz", p.fs_hz.to_string()),
        ("snr_db", p.snr_db.to_string()),
        ("p_wake_to_sleep", p.p_wake_to_sleep.to_string()),
        ("p_sleep_to_wake", p.p_sleep_to_wake.to_string()),
        ("hr_wake_mean_bpm", p.hr_wake_mean_bpm.to_string()),
        ("hr_wake_std_bpm", p.hr_wake_std_bpm.to_string()),
        ("hr_sleep_mean_bpm", p.hr_sleep_mean_bpm.to_string()),
        ("hr_sleep_std_bpm", p.hr_sleep_std_bpm.to_string()),
        ("ibi_jitter_wake_s", p.ibi_jitter_wake_s.to_string()),
        ("ibi_jitter_sleep_s", p.ibi_jitter_sleep_s.to_string()),
        (
            "template_systolic_sigma_s",
            p.template_systolic_sigma_s.to_string(),
        ),
        (
            "template_dicrotic_sigma_s",
            p.template_dicrotic_sigma_s.to_string(),
        ),
        (
            "template_dicrotic_delay_s",
            p.template_dicrotic_delay_s.to_string(),
        ),
        ("template_dicrotic_amp", p.template_dicrotic_amp.to_string()),
        ("act_wake_zero_prob", p.act_wake_zero_prob.to_string()),
        ("act_sleep_zero_prob", p.act_sleep_zero_prob.to_string()),
        ("act_wake_lognorm_mu", p.act_wake_lognorm_mu.to_string()),
        (
            "act_wake_lognorm_sigma",
            p.act_wake_lognorm_sigma.to_string(),
        ),
        ("act_sleep_exp_mean", p.act_sleep_exp_mean.to_string()),
    ];
    for (key, value) in rows {
        let _ = writeln!(out, "{key},{value}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Generate a cohort on disk: dataset manifest plus per-subject recordings,
/// and a `truth/` sidecar with beat times, binary stages, and the full
/// parameter set. Byte-identical across runs with equal parameters.
pub fn generate_cohort(params: &SynthParams, out_dir: &Path) -> Result<CohortSummary> {
    params.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let truth_dir = out_dir.join("truth");
    fs::create_dir_all(&truth_dir).map_err(|e| Error::io(&truth_dir, e))?;

    let mut manifest_rows = Vec::with_capacity(params.subjects);
    let mut sleep_epochs = 0usize;
    let mut total_epochs = 0usize;
    for index in 0..params.subjects {
        let (record, truth) = generate_subject(params, index)?;
        let id = truth.subject_id.clone();
        let ppg_file = format!("{id}.ppg.csv");
        let activity_file = format!("{id}.activity.csv");
        let labels_file = format!("{id}.labels.csv");
        ingest::write_ppg(&out_dir.join(&ppg_file), &record.ppg, &record.demographics)?;
        ingest::write_activity(&out_dir.join(&activity_file), &id, &record.activity)?;
        ingest::write_labels(&out_dir.join(&labels_file), &id, &record.stages)?;
        write_truth_beats(&truth_dir.join(format!("{id}.beats.csv")), &truth)?;
        write_truth_stages(&truth_dir.join(format!("{id}.stages.csv")), &truth)?;
        sleep_epochs += truth
            .stages
            .iter()
            .filter(|s| **s == SleepWakeLabel::Sleep)
            .count();
        total_epochs += truth.stages.len();
        manifest_rows.push((id, ppg_file, activity_file, labels_file));
    }
    write_truth_params(&truth_dir.join("params.csv"), params)?;
    let manifest_path = out_dir.join("manifest.csv");
    ingest::write_manifest(&manifest_path, &manifest_rows)?;
    let sleep_fraction = if total_epochs == 0 {
        0.0
    } else {
        sleep_epochs as f64 / total_epochs as f64
    };
    Ok(CohortSummary {
        subjects: params.subjects,
        epochs_per_subject: params.epochs,
        sleep_fraction,
        manifest_path,
    })
}
