use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{euclidean, Matrix};
use crate::rng::Rng;

use super::{raw_stress, DistanceMatrix, Embedding, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmacofOptions {
    pub max_iter: usize,
    /// Relative raw-stress decrease below which iteration stops.
    pub tolerance: f64,
    pub seed: u64,
    /// Optional wall-clock budget in seconds.
    pub time_budget: Option<f64>,
}

impl Default for SmacofOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tolerance: 1e-4,
            seed: 0,
            time_budget: None,
        }
    }
}

/// Guttman transform `X' = B(X) X / N` with unit weights. Pairs that
/// currently coincide contribute nothing.
fn guttman_transform(d: &DistanceMatrix, x: &Matrix) -> Matrix {
    let n = d.len();
    let m = x.cols();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            let mut out = vec![0.0; m];
            let mut diag = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dist = euclidean(xi, x.row(j));
                if dist == 0.0 {
                    continue;
                }
                let b = d.get(i, j) / dist;
                diag += b;
                for (o, v) in out.iter_mut().zip(x.row(j)) {
                    *o -= b * v;
                }
            }
            for (o, v) in out.iter_mut().zip(xi) {
                *o = (*o + diag * v) / n as f64;
            }
            out
        })
        .collect();
    Matrix::from_fn(n, m, |i, k| rows[i][k])
}

/// Stress majorization baseline, started from a seeded uniform configuration
/// in `[0, max(D)]^m`.
pub fn smacof_fit(d: &DistanceMatrix, m: usize, opts: &SmacofOptions) -> Result<(Embedding, RunTrace)> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("MDS needs at least 2 items, got {n}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be at least 1".into()));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let clock = Instant::now();
    let mut rng = Rng::new(opts.seed);
    let hi = d.max_value().max(f64::MIN_POSITIVE);
    let mut x = Matrix::from_fn(n, m, |_, _| rng.uniform_range(0.0, hi));

    let mut trace = RunTrace::default();
    let mut stress = raw_stress(d, &x)?;
    trace.push(0, stress, clock.elapsed().as_secs_f64());
    for iter in 1..=opts.max_iter {
        x = guttman_transform(d, &x);
        if !x.is_finite() {
            return Err(Error::numerical("SMACOF update produced non-finite coordinates"));
        }
        let next = raw_stress(d, &x)?;
        let elapsed = clock.elapsed().as_secs_f64();
        trace.push(iter, next, elapsed);
        let converged = stress == 0.0 || (stress - next) / stress < opts.tolerance;
        stress = next;
        if converged || opts.time_budget.is_some_and(|b| elapsed >= b) {
            break;
        }
    }
    Ok((Embedding::new(d, x)?, trace))
}
