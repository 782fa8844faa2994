use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mds::DistanceMatrix;

fn checked(i: usize, j: usize, value: f64) -> Result<f64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::Measurement { i, j, value });
    }
    Ok(value)
}

/// Evaluates `measure` once per unordered pair and mirrors the result.
///
/// Pairs are evaluated in parallel; each lands in a fixed slot so the output
/// does not depend on scheduling. The first failing pair in row-major order is
/// reported.
pub fn build_distance_matrix<T, F>(items: &[T], measure: F) -> Result<DistanceMatrix>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64> + Sync,
{
    let n = items.len();
    let upper: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| checked(i, j, measure(&items[i], &items[j])?))
                .collect()
        })
        .collect();
    let mut values = Matrix::zeros(n, n);
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row?.into_iter().enumerate() {
            let j = i + 1 + off;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    DistanceMatrix::new(values)
}

/// Rectangular `queries × items` distances, used to encode unseen items
/// against a fitted training set.
pub fn build_cross_distances<T, F>(queries: &[T], items: &[T], measure: F) -> Result<Matrix>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64> + Sync,
{
    let rows: Vec<Result<Vec<f64>>> = queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            items
                .iter()
                .enumerate()
                .map(|(j, it)| checked(i, j, measure(q, it)?))
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(queries.len() * items.len());
    for row in rows {
        data.extend(row?);
    }
    Matrix::from_vec(queries.len(), items.len(), data)
}
