use serde::{Deserialize, Serialize};

use super::pca::canonical_sign;
use crate::error::{Error, Result};
use crate::linalg::{dot, squared_distance, sym_eigen, Matrix};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Kernel {
    /// `exp(-|x - y|^2 / (2 σ^2))`.
    Gaussian { sigma: f64 },
    /// `(xᵀy + 1)^degree`.
    Polynomial { degree: u32 },
    /// `xᵀy`.
    Linear,
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Gaussian { sigma } => (-squared_distance(x, y) / (2.0 * sigma * sigma)).exp(),
            Kernel::Polynomial { degree } => (dot(x, y) + 1.0).powi(degree as i32),
            Kernel::Linear => dot(x, y),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidArgument(format!("Gaussian kernel width must be positive, got {sigma}")))
            }
            Kernel::Polynomial { degree: 0 } => Err(Error::InvalidArgument("polynomial degree must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// Kernel matrix of the rows of `data`.
pub fn kernel_matrix(data: &Matrix, kernel: &Kernel) -> Matrix {
    let n = data.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(data.row(i), data.row(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Double-centers a kernel matrix: `K - 1K - K1 + 1K1`.
pub fn center_kernel(k: &Matrix) -> Matrix {
    let n = k.rows();
    let row_means: Vec<f64> = k.iter_rows().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    Matrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - row_means[j] + grand)
}

#[derive(Debug, Clone)]
pub struct KpcaModel {
    pub kernel: Kernel,
    pub training: Matrix,
    /// `n x m'`; column `l` is `a_l`, scaled so projections have variance `λ_l`.
    pub alphas: Matrix,
    pub eigenvalues: Vec<f64>,
    pub row_means: Vec<f64>,
    pub grand_mean: f64,
    /// Set when fewer than the requested number of components were usable.
    pub reduced_rank: bool,
}

impl KpcaModel {
    pub fn dimension(&self) -> usize {
        self.alphas.cols()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.training.cols() {
            return Err(Error::Dimension(format!(
                "kernel PCA model expects {} features, got {}",
                self.training.cols(),
                x.len()
            )));
        }
        let n = self.training.rows();
        let k: Vec<f64> = self.training.iter_rows().map(|t| self.kernel.eval(x, t)).collect();
        let mean_k = k.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = (0..n).map(|j| k[j] - mean_k - self.row_means[j] + self.grand_mean).collect();
        Ok((0..self.dimension())
            .map(|l| (0..n).map(|j| self.alphas[(j, l)] * centered[j]).sum())
            .collect())
    }

    pub fn project_all(&self, data: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(data.rows(), self.dimension());
        for (i, row) in data.iter_rows().enumerate() {
            out.row_mut(i).copy_from_slice(&self.project(row)?);
        }
        Ok(out)
    }

    /// Projections of the training points themselves.
    pub fn training_projection(&self) -> Result<Matrix> {
        self.project_all(&self.training)
    }

    pub fn truncate(&self, m: usize) -> KpcaModel {
        let m = m.min(self.dimension());
        let mut out = self.clone();
        out.alphas = Matrix::from_fn(self.alphas.rows(), m, |i, j| self.alphas[(i, j)]);
        out.eigenvalues.truncate(m);
        out
    }
}

/// Kernel PCA keeping up to `m` components with eigenvalue above `1e-12`
/// (relative to the largest).
pub fn kpca_fit(data: &Matrix, kernel: Kernel, m: usize) -> Result<KpcaModel> {
    kernel.validate()?;
    let n = data.rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("kernel PCA needs at least 2 samples, got {n}")));
    }
    if m == 0 || m > n - 1 {
        return Err(Error::InvalidArgument(format!("cannot extract {m} components from {n} samples")));
    }
    let k = kernel_matrix(data, &kernel);
    let row_means: Vec<f64> = k.iter_rows().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand_mean = row_means.iter().sum::<f64>() / n as f64;
    let kc = center_kernel(&k);
    let eig = sym_eigen(&kc)?;
    let floor = 1e-12 * eig.eigenvalues[0].max(0.0);
    let usable = eig.eigenvalues.iter().take(m).take_while(|&&mu| mu > floor && mu > 0.0).count();
    let reduced_rank = usable < m;
    if reduced_rank {
        log::warn!("kernel PCA: only {usable} of {m} requested components have positive eigenvalues");
    }
    // Eigenpairs of K̃ u = μ u give K̃ a = λ N a with λ = μ / N and a = u / sqrt(μ).
    let mut alphas = Matrix::zeros(n, usable);
    for l in 0..usable {
        let mut u = eig.eigenvectors.col(l);
        canonical_sign(&mut u);
        let scale = 1.0 / eig.eigenvalues[l].sqrt();
        for i in 0..n {
            alphas[(i, l)] = u[i] * scale;
        }
    }
    Ok(KpcaModel {
        kernel,
        training: data.clone(),
        alphas,
        eigenvalues: eig.eigenvalues[..usable].iter().map(|mu| mu / n as f64).collect(),
        row_means,
        grand_mean,
        reduced_rank,
    })
}

/// Kernel width from the data: the mean Euclidean distance over all pairs,
/// or over 1000 sampled pairs when there are more.
pub fn gaussian_sigma_auto(data: &Matrix, rng: &mut Rng) -> Result<f64> {
    const SAMPLE_PAIRS: usize = 1000;
    const FLOOR: f64 = 1e-6;
    let n = data.rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    let total_pairs = n * (n - 1) / 2;
    let mut sum = 0.0;
    let count;
    if total_pairs <= SAMPLE_PAIRS {
        for i in 0..n {
            for j in i + 1..n {
                sum += squared_distance(data.row(i), data.row(j)).sqrt();
            }
        }
        count = total_pairs;
    } else {
        for _ in 0..SAMPLE_PAIRS {
            let i = rng.below(n);
            let mut j = rng.below(n - 1);
            if j >= i {
                j += 1;
            }
            sum += squared_distance(data.row(i), data.row(j)).sqrt();
        }
        count = SAMPLE_PAIRS;
    }
    Ok((sum / count as f64).max(FLOOR))
}
