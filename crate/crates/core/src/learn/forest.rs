//! Random forest: bootstrap-bagged Gini decision trees with per-node feature
//! subsampling and class-probability averaging.
//!
//! Each tree draws its own RNG stream from the master seed, so training is
//! bit-identical whether trees are grown in sequence or in parallel. Within a
//! node, features are considered in their sampled order and thresholds in
//! ascending order, with a strictly-better rule choosing the split — ties
//! therefore resolve deterministically. A best split is accepted even when it
//! leaves the impurity unchanged (as long as both children are large enough),
//! which is what lets depth-unbounded trees represent XOR-like interactions
//! whose first split has zero marginal gain.

use crate::learn::matrix::Matrix;
use crate::learn::tree::{Node, Tree};
use crate::seeds::child_seed;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features sampled (without replacement) per node.
    pub mtry: usize,
    /// Minimum training samples in each child of a split.
    pub min_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: 1,
            min_leaf: 5,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub(crate) trees: Vec<Tree>,
    pub(crate) n_features: usize,
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub(crate) fn proba_row(&self, row: &[f64]) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.eval(row)).sum();
        total / self.trees.len() as f64
    }
}

pub(crate) fn train_forest(
    x: &Matrix,
    y: &[f64],
    sample_weights: &[f64],
    params: &ForestParams,
    seed: u64,
) -> ForestModel {
    let tree_seeds: Vec<u64> = (0..params.n_trees)
        .map(|i| child_seed(seed, i as u64))
        .collect();
    let trees: Vec<Tree> = tree_seeds
        .par_iter()
        .map(|&tree_seed| {
            let mut rng = StdRng::seed_from_u64(tree_seed);
            let n = x.n_rows();
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut nodes = Vec::new();
            grow(&mut nodes, x, y, sample_weights, indices, params, &mut rng);
            Tree { nodes }
        })
        .collect();
    ForestModel {
        trees,
        n_features: x.n_cols(),
    }
}

/// Weighted positive fraction and Gini impurity of an index set.
fn node_stats(y: &[f64], w: &[f64], idx: &[usize]) -> (f64, f64, f64) {
    let mut pos = 0.0;
    let mut total = 0.0;
    for &i in idx {
        total += w[i];
        if y[i] == 1.0 {
            pos += w[i];
        }
    }
    let p = pos / total;
    (p, total, 1.0 - p * p - (1.0 - p) * (1.0 - p))
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    child_impurity: f64,
}

fn grow(
    nodes: &mut Vec<Node>,
    x: &Matrix,
    y: &[f64],
    w: &[f64],
    idx: Vec<usize>,
    params: &ForestParams,
    rng: &mut StdRng,
) -> usize {
    let (p, _, impurity) = node_stats(y, w, &idx);
    if impurity == 0.0 || idx.len() < 2 * params.min_leaf {
        let at = nodes.len();
        nodes.push(Node::Leaf { value: p });
        return at;
    }

    // Partial Fisher-Yates: the first `mtry` entries are a uniform sample
    // without replacement.
    let d = x.n_cols();
    let mtry = params.mtry.min(d);
    let mut order: Vec<usize> = (0..d).collect();
    for i in 0..mtry {
        let j = rng.random_range(i..d);
        order.swap(i, j);
    }

    let mut best: Option<BestSplit> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
    for &feature in &order[..mtry] {
        sorted.clear();
        sorted.extend(idx.iter().map(|&i| (x.row(i)[feature], i)));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

        let total_w: f64 = idx.iter().map(|&i| w[i]).sum();
        let total_pos: f64 = idx.iter().filter(|&&i| y[i] == 1.0).map(|&i| w[i]).sum();
        let mut left_w = 0.0;
        let mut left_pos = 0.0;
        for k in 1..sorted.len() {
            let (prev_value, prev_index) = sorted[k - 1];
            left_w += w[prev_index];
            if y[prev_index] == 1.0 {
                left_pos += w[prev_index];
            }
            if sorted[k].0 <= prev_value {
                continue; // Only boundaries between distinct values split.
            }
            if k < params.min_leaf || sorted.len() - k < params.min_leaf {
                continue;
            }
            let right_w = total_w - left_w;
            let right_pos = total_pos - left_pos;
            let pl = left_pos / left_w;
            let pr = right_pos / right_w;
            let child_impurity = left_w * (1.0 - pl * pl - (1.0 - pl) * (1.0 - pl))
                + right_w * (1.0 - pr * pr - (1.0 - pr) * (1.0 - pr));
            if best
                .as_ref()
                .is_none_or(|b| child_impurity < b.child_impurity)
            {
                best = Some(BestSplit {
                    feature,
                    threshold: prev_value + (sorted[k].0 - prev_value) / 2.0,
                    child_impurity,
                });
            }
        }
    }

    let Some(split) = best else {
        let at = nodes.len();
        nodes.push(Node::Leaf { value: p });
        return at;
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .into_iter()
        .partition(|&i| x.row(i)[split.feature] < split.threshold);
    let at = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = grow(nodes, x, y, w, left_idx, params, rng);
    let right = grow(nodes, x, y, w, right_idx, params, rng);
    if let Node::Split { left: l, right: r, .. } = &mut nodes[at] {
        *l = left;
        *r = right;
    }
    at
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    fn xor_data(copies: usize) -> (Matrix, Vec<f64>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..copies {
            for (a, b, label) in [
                (0.0, 0.0, 0.0),
                (0.0, 1.0, 1.0),
                (1.0, 0.0, 1.0),
                (1.0, 1.0, 0.0),
            ] {
                rows.push(vec![a, b]);
                y.push(label);
            }
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn pure_class_training_collapses_every_tree_to_a_unit_leaf() {
        let x = Matrix::from_rows(&(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap();
        let y = ones(10);
        let model = train_forest(&x, &y, &ones(10), &ForestParams::default(), 3);
        assert_eq!(model.n_trees(), 500);
        for tree in &model.trees {
            assert_eq!(tree.nodes.len(), 1, "pure class must not split");
            assert_eq!(tree.eval(&[4.0]), 1.0);
        }
        assert_eq!(model.proba_row(&[0.0]), 1.0);
    }

    #[test]
    fn xor_pattern_is_learned_with_high_training_accuracy() {
        let (x, y) = xor_data(25);
        let model = train_forest(&x, &y, &ones(y.len()), &ForestParams::default(), 17);
        let correct = x
            .rows()
            .zip(&y)
            .filter(|(row, &label)| (model.proba_row(row) >= 0.5) == (label == 1.0))
            .count();
        let accuracy = correct as f64 / y.len() as f64;
        assert!(accuracy > 0.95, "training accuracy {accuracy}");
    }

    #[test]
    fn same_seed_gives_bit_identical_forests_and_predictions() {
        let (x, y) = xor_data(10);
        let w = ones(y.len());
        let a = train_forest(&x, &y, &w, &ForestParams::default(), 99);
        let b = train_forest(&x, &y, &w, &ForestParams::default(), 99);
        assert_eq!(a, b);
        for row in x.rows() {
            assert_eq!(a.proba_row(row).to_bits(), b.proba_row(row).to_bits());
        }
    }

    #[test]
    fn training_point_predictions_survive_a_monotone_feature_transform() {
        let (x, y) = xor_data(10);
        let w = ones(y.len());
        let transformed_rows: Vec<Vec<f64>> = x
            .rows()
            .map(|r| vec![(r[0] + 1.0).exp(), r[1]])
            .collect();
        let xt = Matrix::from_rows(&transformed_rows).unwrap();
        let raw = train_forest(&x, &y, &w, &ForestParams::default(), 7);
        let tx = train_forest(&xt, &y, &w, &ForestParams::default(), 7);
        for (row, trow) in x.rows().zip(xt.rows()) {
            assert_eq!(
                raw.proba_row(row).to_bits(),
                tx.proba_row(trow).to_bits(),
                "probabilities must be identical on training points"
            );
        }
    }

    #[test]
    fn min_leaf_equal_to_sample_count_forbids_all_splits() {
        let x = Matrix::from_rows(&(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        let params = ForestParams {
            min_leaf: 10,
            n_trees: 20,
            ..ForestParams::default()
        };
        let model = train_forest(&x, &y, &ones(10), &params, 1);
        for tree in &model.trees {
            assert_eq!(tree.nodes.len(), 1);
        }
    }

    #[test]
    fn leaf_probabilities_use_sample_weights() {
        // One constant feature forbids splitting, so the single tree is one
        // leaf whose value is the weighted positive fraction 2/3.
        let x = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let y = vec![1.0, 0.0];
        let params = ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        let model = train_forest(&x, &y, &[2.0, 1.0], &params, 0);
        let p = model.proba_row(&[1.0]);
        assert!((p - 2.0 / 3.0).abs() < 1e-15, "weighted leaf {p}");
    }
}
