use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-column statistics of a training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScore {
    pub means: Vec<f64>,
    /// Population standard deviations; zero for constant columns.
    pub stds: Vec<f64>,
}

impl ZScore {
    pub fn fit(train: &Matrix) -> Self {
        let n = train.rows().max(1) as f64;
        let means = train.column_means();
        let stds = (0..train.cols())
            .map(|j| {
                let var = train.iter_rows().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                var.sqrt()
            })
            .collect();
        Self { means, stds }
    }

    /// Constant training columns are only centered.
    pub fn apply(&self, m: &Matrix) -> Result<Matrix> {
        if m.cols() != self.means.len() {
            return Err(Error::Dimension(format!(
                "z-score fitted on {} columns, got {}",
                self.means.len(),
                m.cols()
            )));
        }
        Ok(Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            let c = m[(i, j)] - self.means[j];
            if self.stds[j] > 0.0 {
                c / self.stds[j]
            } else {
                c
            }
        }))
    }
}

/// Fits on `train` and normalizes it along with every matrix in `others`.
pub fn zscore_fit_apply(train: &Matrix, others: &[&Matrix]) -> Result<(Matrix, Vec<Matrix>, ZScore)> {
    let z = ZScore::fit(train);
    let t = z.apply(train)?;
    let o = others.iter().map(|m| z.apply(m)).collect::<Result<Vec<_>>>()?;
    Ok((t, o, z))
}
