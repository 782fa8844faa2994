use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    pub c: f64,
    /// Kernel `exp(-|u - v|^2 / gamma)`.
    pub gamma: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl SvmOptions {
    pub fn new(gamma: f64) -> Self {
        Self {
            c: 1.0,
            gamma,
            tolerance: 1e-3,
            max_iterations: 100_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.gamma > 0.0 && self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid SVM options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SvmModel {
    pub support_vectors: Matrix,
    /// `α_i y_i` for each support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective after each accepted pair update.
    pub objective_trace: Vec<f64>,
}

fn rbf(u: &[f64], v: &[f64], gamma: f64) -> f64 {
    (-squared_distance(u, v) / gamma).exp()
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter_rows()
            .zip(&self.dual_coefficients)
            .map(|(sv, &coef)| coef * rbf(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    /// `+1` when the decision value is non-negative, else `-1`.
    pub fn predict(&self, x: &[f64]) -> i8 {
        if self.decision(x) >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn predict_all(&self, data: &Matrix) -> Vec<i8> {
        (0..data.rows()).into_par_iter().map(|i| self.predict(data.row(i))).collect()
    }
}

/// Soft-margin RBF SVM trained by SMO with maximal-violating-pair selection.
pub fn svm_train(features: &Matrix, labels: &[i8], opts: &SvmOptions) -> Result<SvmModel> {
    opts.validate()?;
    let n = features.rows();
    if labels.len() != n {
        return Err(Error::Dimension(format!("{n} samples but {} labels", labels.len())));
    }
    if labels.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(Error::InvalidArgument("SVM training needs both classes".into()));
    }
    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| rbf(features.row(i), features.row(j), opts.gamma)).collect())
        .collect();
    let k = |i: usize, j: usize| rows[i][j];
    let c = opts.c;

    let mut alpha = vec![0.0; n];
    // Gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij.
    let mut grad = vec![-1.0; n];
    let mut objective = 0.0;
    let mut objective_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < opts.max_iterations {
        let mut i = None;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = None;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = Some(t);
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i, j) else {
            converged = true;
            break;
        };
        if g_max - g_min < opts.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let quad = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(1e-12);
        // Move along y_i e_i − y_j e_j, clipped to the box.
        let mut step = (g_max - g_min) / quad;
        let max_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let max_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        step = step.min(max_i).min(max_j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        alpha[i] = (alpha[i] + y[i] * step).clamp(0.0, c);
        alpha[j] = (alpha[j] - y[j] * step).clamp(0.0, c);
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        // Dual objective (maximization form) increases by step·(g_max − g_min) − ½ quad·step².
        objective += step * (g_max - g_min) - 0.5 * quad * step * step;
        objective_trace.push(objective);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }
    if !converged {
        log::warn!("SVM stopped after {iterations} iterations without meeting the KKT tolerance");
    }

    // Bias from free vectors, else the midpoint of the feasible interval.
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += yg;
            free += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { 0.5 * (ub + lb) };

    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        support_vectors: features.select_rows(&sv),
        dual_coefficients: sv.iter().map(|&t| alpha[t] * y[t]).collect(),
        bias: -rho,
        gamma: opts.gamma,
        iterations,
        converged,
        objective_trace,
    })
}
