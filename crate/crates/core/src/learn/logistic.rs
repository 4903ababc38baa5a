//! L2-regularized logistic regression fit by damped Newton iterations.
//!
//! The objective is the summed (optionally sample-weighted) negative
//! log-likelihood plus `lambda/2 * ||w||^2`; the intercept is not
//! regularized. Newton steps are damped by backtracking halving until the
//! objective decreases, and iteration stops when the gradient max-norm drops
//! below the tolerance or the iteration cap is reached.

use crate::error::{Error, Result};
use crate::learn::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    /// L2 penalty on the weight vector (never the intercept).
    pub lambda: f64,
    /// Stop when the gradient max-norm falls below this.
    pub tolerance: f64,
    /// Newton iteration cap.
    pub max_iterations: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1e-4,
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub(crate) weights: Vec<f64>,
    pub(crate) intercept: f64,
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub(crate) fn proba_row(&self, row: &[f64]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(row)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.intercept;
        sigmoid(z)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + exp(z))`.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Objective value at parameters `theta = [w_0..w_d, b]`.
fn objective(x: &Matrix, y: &[f64], weights: &[f64], lambda: f64, theta: &[f64]) -> f64 {
    let d = x.n_cols();
    let b = theta[d];
    let mut total = 0.0;
    for (i, row) in x.rows().enumerate() {
        let z: f64 = theta[..d].iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + b;
        total += weights[i] * (softplus(z) - y[i] * z);
    }
    total + 0.5 * lambda * theta[..d].iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`objective`] with respect to `theta`.
fn gradient(x: &Matrix, y: &[f64], weights: &[f64], lambda: f64, theta: &[f64]) -> Vec<f64> {
    let d = x.n_cols();
    let b = theta[d];
    let mut g = vec![0.0; d + 1];
    for (i, row) in x.rows().enumerate() {
        let z: f64 = theta[..d].iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + b;
        let r = weights[i] * (sigmoid(z) - y[i]);
        for (gj, xj) in g[..d].iter_mut().zip(row) {
            *gj += r * xj;
        }
        g[d] += r;
    }
    for (gj, wj) in g[..d].iter_mut().zip(theta) {
        *gj += lambda * wj;
    }
    g
}

/// Hessian of [`objective`]: `X'DX` augmented with the intercept column,
/// plus `lambda` on the weight diagonal.
fn hessian(x: &Matrix, weights: &[f64], lambda: f64, theta: &[f64]) -> Vec<Vec<f64>> {
    let d = x.n_cols();
    let b = theta[d];
    let mut h = vec![vec![0.0; d + 1]; d + 1];
    for (i, row) in x.rows().enumerate() {
        let z: f64 = theta[..d].iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + b;
        let p = sigmoid(z);
        let s = weights[i] * p * (1.0 - p);
        for a in 0..=d {
            let xa = if a < d { row[a] } else { 1.0 };
            for c in a..=d {
                let xc = if c < d { row[c] } else { 1.0 };
                h[a][c] += s * xa * xc;
            }
        }
    }
    for (a, row_h) in h.iter_mut().enumerate().take(d) {
        row_h[a] += lambda;
    }
    #[allow(clippy::needless_range_loop)]
    for a in 0..=d {
        for c in 0..a {
            h[a][c] = h[c][a];
        }
    }
    h
}

/// Solve `A s = rhs` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            #[allow(clippy::needless_range_loop)]
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut s = vec![0.0; n];
    for r in (0..n).rev() {
        let mut v = rhs[r];
        for c in r + 1..n {
            v -= a[r][c] * s[c];
        }
        s[r] = v / a[r][r];
    }
    Some(s)
}

/// Fit the model. `y` must contain both classes; `sample_weights` are
/// per-row multipliers (all 1 when no class weighting is in effect).
pub(crate) fn train_logistic(
    x: &Matrix,
    y: &[f64],
    sample_weights: &[f64],
    params: &LogisticParams,
) -> Result<LogisticModel> {
    let d = x.n_cols();
    let mut theta = vec![0.0; d + 1];
    let mut value = objective(x, y, sample_weights, params.lambda, &theta);
    for _ in 0..params.max_iterations {
        let g = gradient(x, y, sample_weights, params.lambda, &theta);
        let max_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_norm < params.tolerance {
            break;
        }
        let h = hessian(x, sample_weights, params.lambda, &theta);
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let step = solve(h, neg_g).ok_or_else(|| {
            Error::invalid("singular Hessian in logistic regression".to_string())
        })?;
        // Backtracking: halve the step until the objective decreases.
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-12 {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(&step)
                .map(|(p, s)| p + t * s)
                .collect();
            let cand_value = objective(x, y, sample_weights, params.lambda, &candidate);
            if cand_value < value {
                theta = candidate;
                value = cand_value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break; // At numerical precision of the optimum.
        }
    }
    let intercept = theta[d];
    theta.truncate(d);
    Ok(LogisticModel {
        weights: theta,
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ones(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    fn fit(x: &Matrix, y: &[f64]) -> LogisticModel {
        train_logistic(x, y, &ones(y.len()), &LogisticParams::default()).unwrap()
    }

    /// Twenty fixed points with overlap so the optimum is finite and O(1).
    fn noisy_set() -> (Matrix, Vec<f64>) {
        let xs = [
            -2.0, -1.7, -1.5, -1.2, -1.0, -0.8, -0.5, -0.3, -0.1, 0.2, -0.4, 0.1, 0.3, 0.6, 0.8,
            1.1, 1.4, 1.6, 1.9, 2.0,
        ];
        let ys = [
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0,
            1.0, 1.0, 1.0,
        ];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
        (Matrix::from_rows(&rows).unwrap(), ys.to_vec())
    }

    #[test]
    fn separable_toy_set_reaches_perfect_training_accuracy() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..100 {
            rows.push(vec![-1.0]);
            y.push(0.0);
            rows.push(vec![1.0]);
            y.push(1.0);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let model = fit(&x, &y);
        let correct = x
            .rows()
            .zip(&y)
            .filter(|(row, &label)| (model.proba_row(row) >= 0.5) == (label == 1.0))
            .count();
        assert_eq!(correct, 200);
        assert!(model.weights[0] > 1.0, "positive slope expected");
    }

    #[test]
    fn symmetric_data_forces_a_near_zero_intercept() {
        // Mirror-symmetric: every (x, y) has a counterpart (-x, 1-y).
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for &v in &[0.2, 0.7, 1.3, 1.9, 2.4] {
            rows.push(vec![v]);
            y.push(1.0);
            rows.push(vec![-v]);
            y.push(0.0);
        }
        // An overlapping mirrored pair keeps the optimum finite.
        rows.push(vec![0.5]);
        y.push(0.0);
        rows.push(vec![-0.5]);
        y.push(1.0);
        let x = Matrix::from_rows(&rows).unwrap();
        let model = fit(&x, &y);
        assert!(
            model.intercept.abs() < 1e-6,
            "intercept = {}",
            model.intercept
        );
    }

    #[test]
    fn newton_optimum_matches_a_zooming_grid_search() {
        let (x, y) = noisy_set();
        let model = fit(&x, &y);
        let lambda = LogisticParams::default().lambda;
        let w = ones(y.len());

        // The objective is strictly convex, so refining a grid around each
        // round's best point converges to the global minimum.
        let (mut cw, mut cb) = (0.0, 0.0);
        let mut half_width = 8.0;
        let (mut best_w, mut best_b) = (cw, cb);
        for _ in 0..5 {
            let mut best = f64::INFINITY;
            for i in 0..=64 {
                for j in 0..=64 {
                    let wv = cw - half_width + 2.0 * half_width * i as f64 / 64.0;
                    let bv = cb - half_width + 2.0 * half_width * j as f64 / 64.0;
                    let v = objective(&x, &y, &w, lambda, &[wv, bv]);
                    if v < best {
                        best = v;
                        best_w = wv;
                        best_b = bv;
                    }
                }
            }
            cw = best_w;
            cb = best_b;
            // Keep the true optimum inside the next window: shrink to four
            // grid steps of the current spacing.
            half_width /= 16.0;
        }
        assert!(
            (model.weights[0] - best_w).abs() < 1e-3,
            "w: newton {} vs grid {}",
            model.weights[0],
            best_w
        );
        assert!(
            (model.intercept - best_b).abs() < 1e-3,
            "b: newton {} vs grid {}",
            model.intercept,
            best_b
        );
    }

    #[test]
    fn gradient_at_the_returned_optimum_is_tiny() {
        let (x, y) = noisy_set();
        let model = fit(&x, &y);
        let theta = vec![model.weights[0], model.intercept];
        let g = gradient(&x, &y, &ones(y.len()), 1e-4, &theta);
        let max_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_norm < 1e-6, "gradient max-norm {max_norm}");
    }

    #[test]
    fn analytic_gradient_matches_central_differences_at_random_points() {
        let (x, y) = noisy_set();
        let w = ones(y.len());
        let lambda = 1e-4;
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = gradient(&x, &y, &w, lambda, &theta);
            for k in 0..theta.len() {
                let h = 1e-6 * (1.0 + theta[k].abs());
                let mut up = theta.clone();
                up[k] += h;
                let mut down = theta.clone();
                down[k] -= h;
                let fd = (objective(&x, &y, &w, lambda, &up)
                    - objective(&x, &y, &w, lambda, &down))
                    / (2.0 * h);
                assert!(
                    (g[k] - fd).abs() <= 1e-4 * (1.0 + fd.abs()),
                    "component {k}: analytic {} vs fd {fd}",
                    g[k]
                );
            }
        }
    }

    #[test]
    fn positive_class_weighting_shifts_the_boundary_toward_recall() {
        let (x, y) = noisy_set();
        let unweighted = fit(&x, &y);
        let weighted: Vec<f64> = y.iter().map(|&v| if v == 1.0 { 4.0 } else { 1.0 }).collect();
        let model = train_logistic(&x, &y, &weighted, &LogisticParams::default()).unwrap();
        // Up-weighting positives raises predicted probabilities everywhere.
        let p0 = unweighted.proba_row(&[0.0]);
        let p1 = model.proba_row(&[0.0]);
        assert!(p1 > p0, "weighted {p1} should exceed unweighted {p0}");
    }

    #[test]
    fn two_dimensional_fit_recovers_the_informative_feature() {
        // Feature 0 carries the signal, feature 1 is constant noise.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        let mut rng = StdRng::seed_from_u64(11);
        for i in 0..200 {
            let signal = if i % 2 == 0 { -1.0 } else { 1.0 };
            let jitter: f64 = rng.random_range(-0.3..0.3);
            rows.push(vec![signal + jitter, 5.0]);
            y.push(if i % 2 == 0 { 0.0 } else { 1.0 });
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let model = fit(&x, &y);
        assert!(model.weights[0] > 1.0);
        // A constant column is indistinguishable from intercept; its weight
        // stays small because the penalty prefers routing it there.
        assert!(model.weights[1].abs() < model.weights[0].abs());
    }
}
