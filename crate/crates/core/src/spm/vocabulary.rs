use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::descriptor::DESCRIPTOR_LEN;
use crate::error::{Error, Result};
use crate::io;
use crate::kmeans::{kmeans, nearest_centroid};
use crate::linalg::Matrix;
use crate::rng::Rng;

const KMEANS_MAX_ITER: usize = 100;

/// Provenance stored next to a persisted vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyMeta {
    pub size: usize,
    pub patch: usize,
    pub step: usize,
    pub seed: u64,
    pub training_hash: String,
}

/// Visual words: k-means centroids over local descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    centroids: Matrix,
}

impl Vocabulary {
    pub fn new(centroids: Matrix) -> Result<Self> {
        if centroids.rows() == 0 || centroids.cols() != DESCRIPTOR_LEN {
            return Err(Error::Dimension(format!(
                "vocabulary must be M x {DESCRIPTOR_LEN} with M >= 1, got {}x{}",
                centroids.rows(),
                centroids.cols()
            )));
        }
        Ok(Self { centroids })
    }

    pub fn size(&self) -> usize {
        self.centroids.rows()
    }

    pub fn centroids(&self) -> &Matrix {
        &self.centroids
    }

    /// Index of the nearest visual word.
    pub fn word(&self, descriptor: &[f64]) -> usize {
        nearest_centroid(&self.centroids, descriptor).0
    }

    fn sidecar(path: &Path) -> PathBuf {
        path.with_extension("json")
    }

    /// Writes `path` (CSV, one centroid per row) and a JSON sidecar next to it.
    pub fn save(&self, path: &Path, meta: &VocabularyMeta) -> Result<()> {
        io::save_matrix_csv(path, &self.centroids, None)?;
        io::save_json(&Self::sidecar(path), meta)
    }

    pub fn load(path: &Path) -> Result<(Self, Option<VocabularyMeta>)> {
        let (_, m) = io::load_matrix_csv(path, false)?;
        let meta = match std::fs::read(Self::sidecar(path)) {
            Ok(bytes) => Some(serde_json::from_slice(&bytes)?),
            Err(_) => None,
        };
        Ok((Self::new(m)?, meta))
    }
}

/// Clusters the non-zero rows of `descriptors` into `size` visual words.
pub fn build_vocabulary(descriptors: &Matrix, size: usize, rng: &mut Rng) -> Result<Vocabulary> {
    if descriptors.cols() != DESCRIPTOR_LEN {
        return Err(Error::Dimension(format!(
            "descriptors must have {DESCRIPTOR_LEN} columns, got {}",
            descriptors.cols()
        )));
    }
    let keep: Vec<usize> = (0..descriptors.rows())
        .filter(|&i| descriptors.row(i).iter().any(|&v| v != 0.0))
        .collect();
    if size == 0 || keep.len() < size {
        return Err(Error::InvalidArgument(format!(
            "vocabulary of size {size} needs at least that many non-zero descriptors, got {}",
            keep.len()
        )));
    }
    let pooled = descriptors.select_rows(&keep);
    let result = kmeans(&pooled, size, rng, KMEANS_MAX_ITER)?;
    Vocabulary::new(result.centroids)
}
