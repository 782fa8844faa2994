use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{euclidean, squared_distance, Matrix};

use super::DistanceMatrix;

fn check_rows(d: &DistanceMatrix, x: &Matrix) -> Result<()> {
    if x.rows() != d.len() {
        return Err(Error::Dimension(format!(
            "configuration has {} rows but the distance matrix is {}x{}",
            x.rows(),
            d.len(),
            d.len()
        )));
    }
    Ok(())
}

/// Per-row partial sums over `j > i`, accumulated in row order so the
/// result does not depend on the thread count.
fn pair_sums(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| f(i, j)).sum())
        .collect();
    partial.iter().sum()
}

/// `Σ_{i<j} (d_ij - ‖x_i - x_j‖)²`.
pub fn raw_stress(d: &DistanceMatrix, x: &Matrix) -> Result<f64> {
    check_rows(d, x)?;
    Ok(pair_sums(d.len(), |i, j| {
        let e = d.get(i, j) - euclidean(x.row(i), x.row(j));
        e * e
    }))
}

/// Normalized stress: `sqrt(raw / Σ_{i<j} ‖x_i - x_j‖²)`.
pub fn stress1(d: &DistanceMatrix, x: &Matrix) -> Result<f64> {
    check_rows(d, x)?;
    let denom = pair_sums(d.len(), |i, j| squared_distance(x.row(i), x.row(j)));
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "all embedded points coincide; Stress-1 is undefined".into(),
        ));
    }
    Ok((raw_stress(d, x)? / denom).sqrt())
}
