//! Metric multidimensional scaling.
//!
//! The main solver is the two-stage iterated Levenberg-Marquardt algorithm
//! ([`ilma_fit`]): points are first inserted one at a time, each placed by a
//! small least-squares solve against the points already placed, and then
//! repeatedly re-solved one at a time against all others in random order.
//! Each single-point solve can only lower the raw stress, so the adjustment
//! sweeps are monotone. [`smacof_fit`] is the majorization baseline and
//! [`encode_new`] places an unseen item into a fitted embedding.

mod distance_matrix;
mod encode;
mod ilma;
mod smacof;
mod stress;
mod subproblem;
mod trace;

pub use distance_matrix::DistanceMatrix;
pub use encode::{encode_new, encoding_objective};
pub use ilma::{ilma_fit, ilma_fit_observed, ilma_init, IlmaInit, IlmaOptions, InitStrategy};
pub use smacof::{smacof_fit, SmacofOptions};
pub use stress::{raw_stress, stress1};
pub use subproblem::{AnchorProblem, Anchors};
pub use trace::{RunTrace, TraceSample};

use std::path::Path;

use crate::error::Result;
use crate::io;
use crate::linalg::Matrix;

/// Fitted MDS codes, one row per item.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub codes: Matrix,
    pub fit_raw_stress: f64,
    /// `NaN` when every code coincides.
    pub fit_stress1: f64,
}

impl Embedding {
    /// Wraps `codes`, recording their stress against `d`.
    pub fn new(d: &DistanceMatrix, codes: Matrix) -> Result<Self> {
        let fit_raw_stress = raw_stress(d, &codes)?;
        let fit_stress1 = stress1(d, &codes).unwrap_or(f64::NAN);
        Ok(Self {
            codes,
            fit_raw_stress,
            fit_stress1,
        })
    }

    /// Codes loaded without a distance matrix; stress fields are `NaN`.
    pub fn from_codes(codes: Matrix) -> Self {
        Self {
            codes,
            fit_raw_stress: f64::NAN,
            fit_stress1: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.codes.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.rows() == 0
    }

    pub fn dimension(&self) -> usize {
        self.codes.cols()
    }

    pub fn header(&self) -> Vec<String> {
        (0..self.dimension()).map(|k| format!("dim{k}")).collect()
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        io::save_matrix_csv(path, &self.codes, Some(&self.header()))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let (_, codes) = io::load_matrix_csv(path, true)?;
        Ok(Self::from_codes(codes))
    }
}
