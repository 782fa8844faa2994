use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eigen, Matrix};

/// Flips `v` so its largest-magnitude entry is positive.
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `m x d`, rows are the leading covariance eigenvectors.
    pub components: Matrix,
    /// Covariance eigenvalues paired with the component rows.
    pub variances: Vec<f64>,
}

impl PcaModel {
    pub fn dimension(&self) -> usize {
        self.components.rows()
    }

    /// Keeps the leading `m` components.
    pub fn truncate(&self, m: usize) -> Result<PcaModel> {
        if m > self.dimension() {
            return Err(Error::InvalidArgument(format!(
                "cannot keep {m} of {} components",
                self.dimension()
            )));
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components.select_rows(&(0..m).collect::<Vec<_>>()),
            variances: self.variances[..m].to_vec(),
        })
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "PCA model expects {} features, got {}",
                self.mean.len(),
                x.len()
            )));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        Ok(self.components.iter_rows().map(|c| dot(c, &centered)).collect())
    }

    pub fn project_all(&self, data: &Matrix) -> Result<Matrix> {
        let rows = data.iter_rows().map(|r| self.project(r)).collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Ok(Matrix::zeros(0, self.dimension()));
        }
        Matrix::from_rows(&rows)
    }
}

/// Principal components of the rows of `data`.
///
/// Wide data (`d > n`) is decomposed through the `n x n` Gram matrix of the
/// centered rows, which has the same non-zero spectrum as the covariance.
pub fn pca_fit(data: &Matrix, m: usize) -> Result<PcaModel> {
    let (n, d) = (data.rows(), data.cols());
    if n < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs at least 2 samples, got {n}")));
    }
    if m == 0 || m > (n - 1).min(d) {
        return Err(Error::InvalidArgument(format!(
            "cannot extract {m} components from {n} samples of dimension {d}"
        )));
    }
    let mean = data.column_means();
    let centered = Matrix::from_fn(n, d, |i, j| data[(i, j)] - mean[j]);
    let inv_n = 1.0 / n as f64;
    let mut components = Matrix::zeros(m, d);
    let mut variances = Vec::with_capacity(m);
    if d <= n {
        let mut cov = centered.transpose().matmul(&centered)?;
        cov.scale(inv_n);
        let eig = sym_eigen(&cov)?;
        for k in 0..m {
            let mut v = eig.eigenvectors.col(k);
            canonical_sign(&mut v);
            components.row_mut(k).copy_from_slice(&v);
            variances.push(eig.eigenvalues[k].max(0.0));
        }
    } else {
        let gram = centered.matmul(&centered.transpose())?;
        let eig = sym_eigen(&gram)?;
        let ct = centered.transpose();
        for k in 0..m {
            let lambda = eig.eigenvalues[k];
            if lambda <= 1e-12 * eig.eigenvalues[0].max(f64::MIN_POSITIVE) {
                return Err(Error::Degenerate(format!(
                    "data spans fewer than {m} directions"
                )));
            }
            let mut v = ct.matvec(&eig.eigenvectors.col(k))?;
            let norm = crate::linalg::norm(&v);
            v.iter_mut().for_each(|x| *x /= norm);
            canonical_sign(&mut v);
            components.row_mut(k).copy_from_slice(&v);
            variances.push(lambda * inv_n);
        }
    }
    Ok(PcaModel {
        mean,
        components,
        variances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = Rng::new(seed);
        Matrix::from_fn(n, d, |_, _| rng.normal())
    }

    #[test]
    fn x_axis_data() {
        let data = Matrix::from_rows(&[vec![-2.0, 0.0], vec![1.0, 0.0], vec![4.0, 0.0]]).unwrap();
        let model = pca_fit(&data, 1).unwrap();
        assert!((model.components[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(model.components[(0, 1)].abs() < 1e-12);
        assert!(model.project(&model.mean.clone()).unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn full_rank_reconstruction_is_lossless() {
        let data = random(20, 5, 1);
        let model = pca_fit(&data, 5).unwrap();
        for row in data.iter_rows() {
            let y = model.project(row).unwrap();
            for j in 0..5 {
                let back = model.mean[j] + (0..5).map(|k| y[k] * model.components[(k, j)]).sum::<f64>();
                assert!((back - row[j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gram_path_matches_covariance_path() {
        let data = random(6, 9, 2);
        let wide = pca_fit(&data, 3).unwrap();
        // Same data padded with samples is not equivalent; instead compare with
        // the covariance eigenproblem computed directly.
        let mean = data.column_means();
        let c = Matrix::from_fn(6, 9, |i, j| data[(i, j)] - mean[j]);
        let mut cov = c.transpose().matmul(&c).unwrap();
        cov.scale(1.0 / 6.0);
        let eig = sym_eigen(&cov).unwrap();
        for k in 0..3 {
            assert!((wide.variances[k] - eig.eigenvalues[k]).abs() < 1e-9);
            let v = eig.eigenvectors.col(k);
            assert!((dot(wide.components.row(k), &v).abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn components_orthonormal_and_translation_invariant() {
        let data = random(15, 4, 3);
        let shifted = Matrix::from_fn(15, 4, |i, j| data[(i, j)] + 10.0 * j as f64 - 3.0);
        let a = pca_fit(&data, 3).unwrap();
        let b = pca_fit(&shifted, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let g = dot(a.components.row(i), a.components.row(j));
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
        let pa = a.project_all(&data).unwrap();
        let pb = b.project_all(&shifted).unwrap();
        assert!(pa.sub(&pb).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn too_many_components() {
        assert!(pca_fit(&random(3, 5, 4), 3).is_err());
        assert!(pca_fit(&random(1, 5, 4), 1).is_err());
    }
}
