use std::path::Path;

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::Matrix;

/// Symmetric, non-negative dissimilarities with a zero diagonal.
/// The triangle inequality is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Matrix,
}

impl DistanceMatrix {
    /// Tolerance used when validating loaded matrices.
    pub const LOAD_TOLERANCE: f64 = 1e-9;

    /// Validates `values` exactly.
    pub fn new(values: Matrix) -> Result<Self> {
        Self::with_tolerance(values, 0.0)
    }

    /// Accepts asymmetry and diagonal entries up to `tol`, then symmetrizes
    /// and zeroes the diagonal.
    pub fn with_tolerance(values: Matrix, tol: f64) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::Dimension(format!(
                "distance matrix must be square, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        let n = values.rows();
        for i in 0..n {
            for j in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Range(format!(
                        "entry ({i}, {j}) = {v} is not a finite non-negative distance"
                    )));
                }
            }
            if values[(i, i)] > tol {
                return Err(Error::Range(format!(
                    "diagonal entry ({i}, {i}) = {} is not zero",
                    values[(i, i)]
                )));
            }
        }
        if values.asymmetry() > tol {
            return Err(Error::Range(format!(
                "distance matrix is not symmetric (max |d_ij - d_ji| = {:e})",
                values.asymmetry()
            )));
        }
        let values = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                0.5 * (values[(i, j)] + values[(j, i)])
            }
        });
        Ok(Self { values })
    }

    /// Builds from a pair function evaluated for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self::new(m)
    }

    /// Exact Euclidean distances between the rows of `points`.
    pub fn euclidean(points: &Matrix) -> Self {
        let n = points.rows();
        Self::from_fn(n, |i, j| crate::linalg::euclidean(points.row(i), points.row(j)))
            .expect("Euclidean distances are valid")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn into_matrix(self) -> Matrix {
        self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.max_abs()
    }

    /// Sub-matrix over `idx` (in that order).
    pub fn subset(&self, idx: &[usize]) -> Self {
        let values = Matrix::from_fn(idx.len(), idx.len(), |a, b| self.values[(idx[a], idx[b])]);
        Self { values }
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        io::save_matrix_csv(path, &self.values, None)
    }

    /// Loads an `N x N` headerless CSV, checking symmetry and the diagonal to `1e-9`.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let (_, m) = io::load_matrix_csv(path, false)?;
        Self::with_tolerance(m, Self::LOAD_TOLERANCE)
            .map_err(|e| e.context(format!("validating {}", path.display())))
    }
}
