//! The three sleep-wake classifiers behind one train/predict interface.
//!
//! All learners consume a [`Matrix`] of finite features and one label per
//! row, treat Sleep as the positive class, and emit probabilities in [0, 1];
//! [`TrainedModel::predict`] maps `probability >= threshold` to Sleep.
//! Training is deterministic: a fixed `(seed, data, config)` triple always
//! yields bit-identical parameters and predictions.
//!
//! # Serialized model format (version 1)
//!
//! Models round-trip exactly through a line-oriented text form. Every file
//! starts with the magic line `sleepwake-model v1` followed by `key = value`
//! lines in a fixed per-kind order. Floats use Rust's shortest round-trip
//! representation. Trees are flattened preorder token lists where
//! `S <feature> <threshold>` opens a split (left subtree first) and
//! `L <value>` is a leaf:
//!
//! ```text
//! sleepwake-model v1
//! kind = logistic
//! n_features = 3
//! weights = 0.25 -1.5 0.125
//! intercept = -0.5
//! ```
//!
//! `random_forest` files carry `n_features`, `n_trees`, then one
//! `tree = ...` line per tree (leaves are class probabilities); `gbdt` files
//! carry `n_features`, `learning_rate`, `base_score`, `n_trees`, then the
//! `tree = ...` lines (leaves are raw additive scores).

mod forest;
mod gbdt;
mod logistic;
mod matrix;
mod tree;

pub use forest::{ForestModel, ForestParams};
pub use gbdt::{GbdtModel, GbdtParams};
pub use logistic::{LogisticModel, LogisticParams};
pub use matrix::Matrix;

use crate::error::{Error, Result};
use crate::model::SleepWakeLabel;
use tree::Tree;

pub const MODEL_MAGIC: &str = "sleepwake-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Logistic,
    RandomForest,
    Gbdt,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Gbdt => "gbdt",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelKind> {
        match s {
            "logistic" => Ok(ModelKind::Logistic),
            "rf" | "random_forest" => Ok(ModelKind::RandomForest),
            "gbdt" => Ok(ModelKind::Gbdt),
            other => Err(Error::InvalidHyperparameter {
                name: "model".to_string(),
                message: format!("unknown model kind {other:?} (expected logistic, rf, or gbdt)"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub seed: u64,
    /// Probability at or above which a row is called Sleep.
    pub threshold: f64,
    /// Multiplier on Sleep-row sample weights (1 = no imbalance correction).
    pub positive_weight: f64,
    pub logistic: LogisticParams,
    pub forest: ForestParams,
    pub gbdt: GbdtParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            kind: ModelKind::Gbdt,
            seed: 0,
            threshold: 0.5,
            positive_weight: 1.0,
            logistic: LogisticParams::default(),
            forest: ForestParams::default(),
            gbdt: GbdtParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, message: String| {
            Err(Error::InvalidHyperparameter {
                name: name.to_string(),
                message,
            })
        };
        if !self.threshold.is_finite() || self.threshold <= 0.0 || self.threshold >= 1.0 {
            return bad("threshold", format!("{} is outside (0, 1)", self.threshold));
        }
        if !self.positive_weight.is_finite() || self.positive_weight <= 0.0 {
            return bad(
                "positive_weight",
                format!("{} must be finite and positive", self.positive_weight),
            );
        }
        if !self.logistic.lambda.is_finite() || self.logistic.lambda < 0.0 {
            return bad("lambda_lr", format!("{} must be >= 0", self.logistic.lambda));
        }
        if !self.logistic.tolerance.is_finite() || self.logistic.tolerance <= 0.0 {
            return bad(
                "tolerance",
                format!("{} must be > 0", self.logistic.tolerance),
            );
        }
        if self.logistic.max_iterations == 0 {
            return bad("max_iterations", "must be >= 1".to_string());
        }
        if self.forest.n_trees == 0 {
            return bad("n_trees", "must be >= 1".to_string());
        }
        if self.forest.mtry == 0 {
            return bad("mtry", "must be >= 1".to_string());
        }
        if self.forest.min_leaf == 0 {
            return bad("min_leaf", "must be >= 1".to_string());
        }
        if self.gbdt.n_rounds == 0 {
            return bad("n_rounds", "must be >= 1".to_string());
        }
        if self.gbdt.max_depth == 0 {
            return bad("max_depth", "must be >= 1".to_string());
        }
        if !self.gbdt.learning_rate.is_finite()
            || self.gbdt.learning_rate <= 0.0
            || self.gbdt.learning_rate > 1.0
        {
            return bad(
                "learning_rate",
                format!("{} is outside (0, 1]", self.gbdt.learning_rate),
            );
        }
        if !self.gbdt.lambda.is_finite() || self.gbdt.lambda < 0.0 {
            return bad("lambda", format!("{} must be >= 0", self.gbdt.lambda));
        }
        if !self.gbdt.gamma.is_finite() || self.gbdt.gamma < 0.0 {
            return bad("gamma", format!("{} must be >= 0", self.gbdt.gamma));
        }
        if !self.gbdt.min_child_weight.is_finite() || self.gbdt.min_child_weight < 0.0 {
            return bad(
                "min_child_weight",
                format!("{} must be >= 0", self.gbdt.min_child_weight),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Logistic(LogisticModel),
    Forest(ForestModel),
    Gbdt(GbdtModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Logistic(_) => ModelKind::Logistic,
            TrainedModel::Forest(_) => ModelKind::RandomForest,
            TrainedModel::Gbdt(_) => ModelKind::Gbdt,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Logistic(m) => m.n_features(),
            TrainedModel::Forest(m) => m.n_features(),
            TrainedModel::Gbdt(m) => m.n_features(),
        }
    }

    /// Sleep probability for every row.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features() {
            return Err(Error::FeatureArityMismatch {
                expected: self.n_features(),
                got: x.n_cols(),
            });
        }
        Ok(match self {
            TrainedModel::Logistic(m) => x.rows().map(|r| m.proba_row(r)).collect(),
            TrainedModel::Forest(m) => x.rows().map(|r| m.proba_row(r)).collect(),
            TrainedModel::Gbdt(m) => x.rows().map(|r| m.proba_row(r)).collect(),
        })
    }

    /// Hard labels: probability at or above `threshold` is Sleep.
    pub fn predict(&self, x: &Matrix, threshold: f64) -> Result<Vec<SleepWakeLabel>> {
        if !threshold.is_finite() || threshold <= 0.0 || threshold >= 1.0 {
            return Err(Error::InvalidHyperparameter {
                name: "threshold".to_string(),
                message: format!("{threshold} is outside (0, 1)"),
            });
        }
        Ok(self
            .predict_proba(x)?
            .into_iter()
            .map(|p| {
                if p >= threshold {
                    SleepWakeLabel::Sleep
                } else {
                    SleepWakeLabel::Wake
                }
            })
            .collect())
    }

    // -- serialization -----------------------------------------------------

    /// Render the documented version-1 text form (exact round-trip).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_MAGIC);
        out.push('\n');
        match self {
            TrainedModel::Logistic(m) => {
                out.push_str("kind = logistic\n");
                out.push_str(&format!("n_features = {}\n", m.n_features()));
                let weights: Vec<String> =
                    m.weights().iter().map(|w| format!("{w}")).collect();
                out.push_str(&format!("weights = {}\n", weights.join(" ")));
                out.push_str(&format!("intercept = {}\n", m.intercept()));
            }
            TrainedModel::Forest(m) => {
                out.push_str("kind = random_forest\n");
                out.push_str(&format!("n_features = {}\n", m.n_features));
                out.push_str(&format!("n_trees = {}\n", m.trees.len()));
                for tree in &m.trees {
                    out.push_str(&format!("tree = {}\n", tree.to_tokens()));
                }
            }
            TrainedModel::Gbdt(m) => {
                out.push_str("kind = gbdt\n");
                out.push_str(&format!("n_features = {}\n", m.n_features));
                out.push_str(&format!("learning_rate = {}\n", m.learning_rate));
                out.push_str(&format!("base_score = {}\n", m.base_score));
                out.push_str(&format!("n_trees = {}\n", m.trees.len()));
                for tree in &m.trees {
                    out.push_str(&format!("tree = {}\n", tree.to_tokens()));
                }
            }
        }
        out
    }

    /// Parse the version-1 text form, validating structure and ranges.
    pub fn from_text(text: &str) -> Result<TrainedModel> {
        let mut cursor = Cursor {
            lines: text.lines().enumerate(),
        };
        let (line, magic) = cursor
            .next_line()
            .ok_or_else(|| parse_err(1, "empty model file"))?;
        if magic.trim() != MODEL_MAGIC {
            return Err(parse_err(
                line,
                format!("expected magic line {MODEL_MAGIC:?}, found {magic:?}"),
            ));
        }

        let (kind_line, kind) = cursor.expect_kv("kind")?;
        let (nf_line, nf_raw) = cursor.expect_kv("n_features")?;
        let n_features: usize = nf_raw
            .parse()
            .map_err(|_| parse_err(nf_line, format!("invalid n_features {nf_raw:?}")))?;
        if n_features == 0 {
            return Err(parse_err(nf_line, "n_features must be >= 1"));
        }

        let model = match kind {
            "logistic" => {
                let (w_line, w_raw) = cursor.expect_kv("weights")?;
                let weights: Vec<f64> = w_raw
                    .split_whitespace()
                    .map(|t| parse_finite(w_line, "weight", t))
                    .collect::<Result<_>>()?;
                if weights.len() != n_features {
                    return Err(parse_err(
                        w_line,
                        format!("{} weights for {n_features} features", weights.len()),
                    ));
                }
                let (b_line, b_raw) = cursor.expect_kv("intercept")?;
                let intercept = parse_finite(b_line, "intercept", b_raw)?;
                TrainedModel::Logistic(LogisticModel { weights, intercept })
            }
            "random_forest" => {
                let trees = cursor.parse_trees(n_features)?;
                for tree in &trees {
                    for node in &tree.nodes {
                        if let tree::Node::Leaf { value } = node {
                            if !(0.0..=1.0).contains(value) {
                                return Err(parse_err(
                                    0,
                                    format!("forest leaf probability {value} outside [0, 1]"),
                                ));
                            }
                        }
                    }
                }
                TrainedModel::Forest(ForestModel { trees, n_features })
            }
            "gbdt" => {
                let (lr_line, lr_raw) = cursor.expect_kv("learning_rate")?;
                let learning_rate = parse_finite(lr_line, "learning_rate", lr_raw)?;
                let (bs_line, bs_raw) = cursor.expect_kv("base_score")?;
                let base_score = parse_finite(bs_line, "base_score", bs_raw)?;
                let trees = cursor.parse_trees(n_features)?;
                TrainedModel::Gbdt(GbdtModel {
                    trees,
                    learning_rate,
                    base_score,
                    n_features,
                })
            }
            other => {
                return Err(parse_err(kind_line, format!("unknown model kind {other:?}")));
            }
        };

        if let Some((line, raw)) = cursor.next_line() {
            if !raw.trim().is_empty() {
                return Err(parse_err(
                    line,
                    format!("unexpected trailing content {raw:?}"),
                ));
            }
        }
        Ok(model)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ModelParse {
        line,
        message: message.into(),
    }
}

fn parse_finite(line: usize, name: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {name} {raw:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {name} {raw:?}")));
    }
    Ok(v)
}

struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Cursor<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.lines.next().map(|(i, l)| (i + 1, l))
    }

    /// Read the next line as `key = value`, insisting on the expected key.
    fn expect_kv(&mut self, expected_key: &str) -> Result<(usize, &'a str)> {
        let (line, raw) = self
            .next_line()
            .ok_or_else(|| parse_err(0, format!("missing field {expected_key:?}")))?;
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `{expected_key} = ...`")))?;
        if key.trim() != expected_key {
            return Err(parse_err(
                line,
                format!("expected field {expected_key:?}, found {:?}", key.trim()),
            ));
        }
        Ok((line, value.trim()))
    }

    /// Read `n_trees = N` followed by exactly N `tree = ...` lines.
    fn parse_trees(&mut self, n_features: usize) -> Result<Vec<Tree>> {
        let (nt_line, nt_raw) = self.expect_kv("n_trees")?;
        let n_trees: usize = nt_raw
            .parse()
            .map_err(|_| parse_err(nt_line, format!("invalid n_trees {nt_raw:?}")))?;
        if n_trees == 0 {
            return Err(parse_err(nt_line, "n_trees must be >= 1"));
        }
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let (t_line, tokens) = self.expect_kv("tree")?;
            let tree = Tree::from_tokens(tokens, t_line)?;
            if let Some(max) = tree.max_feature() {
                if max >= n_features {
                    return Err(parse_err(
                        t_line,
                        format!("tree splits on feature {max} but n_features = {n_features}"),
                    ));
                }
            }
            trees.push(tree);
        }
        Ok(trees)
    }
}

/// Train the configured model kind. Logistic and boosted models require both
/// classes in `y`; a single-class forest degenerates to the constant model.
pub fn train(x: &Matrix, y: &[SleepWakeLabel], config: &TrainConfig) -> Result<TrainedModel> {
    config.validate()?;
    if x.n_rows() < 2 {
        return Err(Error::invalid(format!(
            "training needs at least 2 rows, got {}",
            x.n_rows()
        )));
    }
    if y.len() != x.n_rows() {
        return Err(Error::PredictionLengthMismatch {
            truths: y.len(),
            predictions: x.n_rows(),
        });
    }
    let y01: Vec<f64> = y
        .iter()
        .map(|l| match l {
            SleepWakeLabel::Sleep => 1.0,
            SleepWakeLabel::Wake => 0.0,
        })
        .collect();
    let weights: Vec<f64> = y01
        .iter()
        .map(|&v| if v == 1.0 { config.positive_weight } else { 1.0 })
        .collect();
    let single_class = y01.iter().all(|&v| v == y01[0]);

    match config.kind {
        ModelKind::Logistic => {
            if single_class {
                return Err(Error::SingleClassTraining {
                    kind: "logistic".to_string(),
                });
            }
            Ok(TrainedModel::Logistic(logistic::train_logistic(
                x,
                &y01,
                &weights,
                &config.logistic,
            )?))
        }
        ModelKind::RandomForest => Ok(TrainedModel::Forest(forest::train_forest(
            x,
            &y01,
            &weights,
            &config.forest,
            config.seed,
        ))),
        ModelKind::Gbdt => {
            if single_class {
                return Err(Error::SingleClassTraining {
                    kind: "gbdt".to_string(),
                });
            }
            Ok(TrainedModel::Gbdt(gbdt::train_gbdt(
                x,
                &y01,
                &weights,
                &config.gbdt,
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SleepWakeLabel::{Sleep, Wake};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// A hand-built three-feature forest whose single tree routes feature 0
    /// to exact probabilities 0.49 / 0.5 / 0.51.
    fn staircase_model() -> TrainedModel {
        let tokens = "S 0 1 L 0.49 S 0 2 L 0.5 L 0.51";
        TrainedModel::Forest(ForestModel {
            trees: vec![Tree::from_tokens(tokens, 1).unwrap()],
            n_features: 3,
        })
    }

    fn toy_training_set(seed: u64, n: usize) -> (Matrix, Vec<SleepWakeLabel>) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let sleep = rng.random_range(0..2) == 1;
            let hr = if sleep {
                rng.random_range(50.0..65.0)
            } else {
                rng.random_range(65.0..90.0)
            };
            let hrv = rng.random_range(0.01..0.1);
            let act = if sleep {
                0.0
            } else {
                rng.random_range(0.0..20.0)
            };
            rows.push(vec![hr, hrv, act]);
            y.push(if sleep { Sleep } else { Wake });
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn threshold_is_inclusive_at_the_boundary() {
        let model = staircase_model();
        let x = Matrix::from_rows(&[
            vec![0.5, 0.0, 0.0],
            vec![1.5, 0.0, 0.0],
            vec![2.5, 0.0, 0.0],
        ])
        .unwrap();
        let probas = model.predict_proba(&x).unwrap();
        assert_eq!(probas, vec![0.49, 0.5, 0.51]);
        let labels = model.predict(&x, 0.5).unwrap();
        assert_eq!(labels, vec![Wake, Sleep, Sleep]);
    }

    #[test]
    fn constant_model_above_threshold_predicts_all_sleep() {
        let model = TrainedModel::Forest(ForestModel {
            trees: vec![Tree::leaf(0.6)],
            n_features: 3,
        });
        let x = Matrix::from_rows(&[vec![0.0; 3], vec![100.0; 3]]).unwrap();
        assert_eq!(model.predict(&x, 0.5).unwrap(), vec![Sleep, Sleep]);
    }

    #[test]
    fn column_arity_mismatch_is_an_error() {
        let model = staircase_model();
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let err = model.predict_proba(&x).unwrap_err();
        assert!(matches!(
            err,
            Error::FeatureArityMismatch {
                expected: 3,
                got: 2
            }
        ));
        assert!(model.predict(&x, 0.5).is_err());
    }

    #[test]
    fn raising_the_threshold_never_adds_sleep_predictions() {
        let (x, y) = toy_training_set(40, 80);
        let config = TrainConfig {
            kind: ModelKind::Logistic,
            ..TrainConfig::default()
        };
        let model = train(&x, &y, &config).unwrap();
        let mut previous = usize::MAX;
        for t in [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9] {
            let sleep_count = model
                .predict(&x, t)
                .unwrap()
                .iter()
                .filter(|&&l| l == Sleep)
                .count();
            assert!(
                sleep_count <= previous,
                "threshold {t}: {sleep_count} > {previous}"
            );
            previous = sleep_count;
        }
    }

    #[test]
    fn invalid_hyperparameters_are_rejected_before_training() {
        let (x, y) = toy_training_set(1, 10);
        let bad_threshold = TrainConfig {
            threshold: 1.0,
            ..TrainConfig::default()
        };
        assert!(train(&x, &y, &bad_threshold).is_err());
        let mut no_trees = TrainConfig {
            kind: ModelKind::RandomForest,
            ..TrainConfig::default()
        };
        no_trees.forest.n_trees = 0;
        assert!(train(&x, &y, &no_trees).is_err());
        let mut bad_rate = TrainConfig::default();
        bad_rate.gbdt.learning_rate = 0.0;
        assert!(train(&x, &y, &bad_rate).is_err());
        let mut zero_mtry = TrainConfig {
            kind: ModelKind::RandomForest,
            ..TrainConfig::default()
        };
        zero_mtry.forest.mtry = 0;
        assert!(train(&x, &y, &zero_mtry).is_err());
    }

    #[test]
    fn single_class_labels_error_except_for_the_forest() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]).unwrap();
        let y = vec![Sleep, Sleep];
        for kind in [ModelKind::Logistic, ModelKind::Gbdt] {
            let config = TrainConfig {
                kind,
                ..TrainConfig::default()
            };
            let err = train(&x, &y, &config).unwrap_err();
            assert!(matches!(err, Error::SingleClassTraining { .. }), "{kind:?}");
        }
        let config = TrainConfig {
            kind: ModelKind::RandomForest,
            ..TrainConfig::default()
        };
        let model = train(&x, &y, &config).unwrap();
        let probas = model.predict_proba(&x).unwrap();
        assert!(probas.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn probabilities_stay_in_the_unit_interval_for_all_kinds() {
        let (x, y) = toy_training_set(9, 60);
        for kind in [ModelKind::Logistic, ModelKind::RandomForest, ModelKind::Gbdt] {
            let mut config = TrainConfig {
                kind,
                seed: 5,
                ..TrainConfig::default()
            };
            config.forest.n_trees = 30;
            config.gbdt.n_rounds = 20;
            let model = train(&x, &y, &config).unwrap();
            for p in model.predict_proba(&x).unwrap() {
                assert!((0.0..=1.0).contains(&p), "{kind:?} produced {p}");
            }
        }
    }

    #[test]
    fn every_kind_round_trips_through_text_exactly() {
        let (x, y) = toy_training_set(33, 50);
        for kind in [ModelKind::Logistic, ModelKind::RandomForest, ModelKind::Gbdt] {
            let mut config = TrainConfig {
                kind,
                seed: 12,
                ..TrainConfig::default()
            };
            config.forest.n_trees = 12;
            config.gbdt.n_rounds = 8;
            let model = train(&x, &y, &config).unwrap();
            let text = model.to_text();
            let back = TrainedModel::from_text(&text).unwrap();
            assert_eq!(back, model, "{kind:?} must round-trip exactly");
            let before = model.predict_proba(&x).unwrap();
            let after = back.predict_proba(&x).unwrap();
            for (a, b) in before.iter().zip(&after) {
                assert_eq!(a.to_bits(), b.to_bits(), "{kind:?}");
            }
            assert_eq!(text, back.to_text(), "re-serialization is stable");
        }
    }

    #[test]
    fn serialized_text_is_bit_identical_across_runs() {
        let (x, y) = toy_training_set(77, 40);
        let mut config = TrainConfig {
            kind: ModelKind::RandomForest,
            seed: 3,
            ..TrainConfig::default()
        };
        config.forest.n_trees = 25;
        let a = train(&x, &y, &config).unwrap().to_text();
        let b = train(&x, &y, &config).unwrap().to_text();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_model_files_are_rejected_with_line_numbers() {
        let cases: Vec<(String, usize)> = vec![
            ("not a model\n".to_string(), 1),
            (format!("{MODEL_MAGIC}\nkind = svm\nn_features = 3\n"), 0), // line checked below
            (
                format!("{MODEL_MAGIC}\nkind = logistic\nn_features = 2\nweights = 1.0\nintercept = 0\n"),
                4,
            ),
            (
                format!("{MODEL_MAGIC}\nkind = logistic\nn_features = 1\nweights = nan\nintercept = 0\n"),
                4,
            ),
            (
                format!(
                    "{MODEL_MAGIC}\nkind = random_forest\nn_features = 1\nn_trees = 1\ntree = S 4 0.5 L 0.1 L 0.9\n"
                ),
                5,
            ),
            (
                format!(
                    "{MODEL_MAGIC}\nkind = random_forest\nn_features = 1\nn_trees = 1\ntree = L 1.5\n"
                ),
                0,
            ),
            (
                format!("{MODEL_MAGIC}\nkind = gbdt\nn_features = 1\nlearning_rate = 0.3\nbase_score = inf\nn_trees = 1\ntree = L 0\n"),
                5,
            ),
            (
                format!("{MODEL_MAGIC}\nkind = logistic\nn_features = 1\nweights = 1\nintercept = 0\ngarbage\n"),
                6,
            ),
        ];
        for (text, expect_line) in cases {
            let err = TrainedModel::from_text(&text).unwrap_err();
            match err {
                Error::ModelParse { line, .. } => {
                    if expect_line > 0 {
                        assert_eq!(line, expect_line, "input:\n{text}");
                    }
                }
                other => panic!("expected ModelParse for:\n{text}\ngot {other:?}"),
            }
        }
        // The unknown-kind case reports the kind line specifically.
        let err =
            TrainedModel::from_text(&format!("{MODEL_MAGIC}\nkind = svm\nn_features = 3\n"))
                .unwrap_err();
        assert!(matches!(err, Error::ModelParse { line: 2, .. }));
    }

    #[test]
    fn kind_names_parse_and_print_consistently() {
        assert_eq!("logistic".parse::<ModelKind>().unwrap(), ModelKind::Logistic);
        assert_eq!("rf".parse::<ModelKind>().unwrap(), ModelKind::RandomForest);
        assert_eq!(
            "random_forest".parse::<ModelKind>().unwrap(),
            ModelKind::RandomForest
        );
        assert_eq!("gbdt".parse::<ModelKind>().unwrap(), ModelKind::Gbdt);
        assert!("svm".parse::<ModelKind>().is_err());
        assert_eq!(ModelKind::Gbdt.as_str(), "gbdt");
    }

    #[test]
    fn gbdt_separates_the_toy_sleep_cohort() {
        let (x, y) = toy_training_set(21, 120);
        let config = TrainConfig::default();
        let model = train(&x, &y, &config).unwrap();
        let labels = model.predict(&x, 0.5).unwrap();
        let correct = labels.iter().zip(&y).filter(|(a, b)| a == b).count();
        assert!(
            correct as f64 / y.len() as f64 > 0.95,
            "training accuracy {correct}/{}",
            y.len()
        );
    }
}
