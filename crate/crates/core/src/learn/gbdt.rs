//! Gradient-boosted trees: second-order boosting on the logistic loss with
//! exact greedy split search.
//!
//! Each round computes per-row gradients `g = w(p - y)` and hessians
//! `h = w p (1 - p)` at the current raw scores, then grows one depth-bounded
//! tree maximizing
//! `gain = 1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma`
//! over every feature and every boundary between distinct sorted values,
//! subject to both children carrying at least `min_child_weight` of hessian
//! mass. A node becomes a leaf with weight `-G/(H+lambda)` when no candidate
//! has positive gain or the depth limit is reached. Trees store raw leaf
//! weights; the learning rate scales them at accumulation time, on top of a
//! base score of `logit(weighted prior)`. Training is fully deterministic —
//! no randomness is involved.

use crate::learn::logistic::sigmoid;
use crate::learn::matrix::Matrix;
use crate::learn::tree::{Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum gain required to keep a split.
    pub gamma: f64,
    /// Minimum hessian mass in each child.
    pub min_child_weight: f64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            n_rounds: 100,
            max_depth: 6,
            learning_rate: 0.3,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub(crate) trees: Vec<Tree>,
    pub(crate) learning_rate: f64,
    pub(crate) base_score: f64,
    pub(crate) n_features: usize,
}

impl GbdtModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub(crate) fn raw_score(&self, row: &[f64]) -> f64 {
        let leaves: f64 = self.trees.iter().map(|t| t.eval(row)).sum();
        self.base_score + self.learning_rate * leaves
    }

    pub(crate) fn proba_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

pub(crate) fn train_gbdt(
    x: &Matrix,
    y: &[f64],
    sample_weights: &[f64],
    params: &GbdtParams,
) -> GbdtModel {
    let n = x.n_rows();
    let total_w: f64 = sample_weights.iter().sum();
    let pos_w: f64 = y
        .iter()
        .zip(sample_weights)
        .filter(|(&label, _)| label == 1.0)
        .map(|(_, &w)| w)
        .sum();
    let prior = pos_w / total_w;
    let base_score = (prior / (1.0 - prior)).ln();

    let mut raw = vec![base_score; n];
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            let p = sigmoid(raw[i]);
            g[i] = sample_weights[i] * (p - y[i]);
            h[i] = sample_weights[i] * p * (1.0 - p);
        }
        let mut nodes = Vec::new();
        grow(&mut nodes, x, &g, &h, (0..n).collect(), 0, params);
        let tree = Tree { nodes };
        for (i, r) in raw.iter_mut().enumerate() {
            *r += params.learning_rate * tree.eval(x.row(i));
        }
        trees.push(tree);
    }
    GbdtModel {
        trees,
        learning_rate: params.learning_rate,
        base_score,
        n_features: x.n_cols(),
    }
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn grow(
    nodes: &mut Vec<Node>,
    x: &Matrix,
    g: &[f64],
    h: &[f64],
    idx: Vec<usize>,
    depth: usize,
    params: &GbdtParams,
) -> usize {
    let g_total: f64 = idx.iter().map(|&i| g[i]).sum();
    let h_total: f64 = idx.iter().map(|&i| h[i]).sum();
    let leaf = |nodes: &mut Vec<Node>| {
        let at = nodes.len();
        nodes.push(Node::Leaf {
            value: -g_total / (h_total + params.lambda),
        });
        at
    };
    if depth >= params.max_depth || idx.len() < 2 {
        return leaf(nodes);
    }

    let parent_term = g_total * g_total / (h_total + params.lambda);
    let mut best: Option<BestSplit> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
    for feature in 0..x.n_cols() {
        sorted.clear();
        sorted.extend(idx.iter().map(|&i| (x.row(i)[feature], i)));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut g_left = 0.0;
        let mut h_left = 0.0;
        for k in 1..sorted.len() {
            let (prev_value, prev_index) = sorted[k - 1];
            g_left += g[prev_index];
            h_left += h[prev_index];
            if sorted[k].0 <= prev_value {
                continue;
            }
            let h_right = h_total - h_left;
            if h_left < params.min_child_weight || h_right < params.min_child_weight {
                continue;
            }
            let g_right = g_total - g_left;
            let gain = 0.5
                * (g_left * g_left / (h_left + params.lambda)
                    + g_right * g_right / (h_right + params.lambda)
                    - parent_term)
                - params.gamma;
            if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                best = Some(BestSplit {
                    gain,
                    feature,
                    threshold: prev_value + (sorted[k].0 - prev_value) / 2.0,
                });
            }
        }
    }

    let Some(split) = best else {
        return leaf(nodes);
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
    let left = grow(nodes, x, g, h, left_idx, depth + 1, params);
    let right = grow(nodes, x, g, h, right_idx, depth + 1, params);
    if let Node::Split { left: l, right: r, .. } = &mut nodes[at] {
        *l = left;
        *r = right;
    }
    at
}
