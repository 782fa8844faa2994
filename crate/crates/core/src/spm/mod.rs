//! Spatial pyramid matching: dense descriptors, a k-means visual vocabulary,
//! multi-level word histograms and the normalized pyramid match similarity.

mod descriptor;
mod pyramid;
mod vocabulary;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use descriptor::{
    dense_descriptors, descriptor_matrix, grid_len, LocalDescriptor, CELLS, DESCRIPTOR_LEN, ORIENTATIONS,
};
pub use pyramid::{
    level_weight, load_pyramid_vectors, pyramid_len, pyramid_match_similarity, pyramid_matrix, pyramid_vector,
    save_pyramid_vectors, PyramidVector,
};
pub use vocabulary::{build_vocabulary, Vocabulary, VocabularyMeta};

use crate::distances::GrayImage;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpmParams {
    pub vocab_size: usize,
    pub levels: usize,
    pub step: usize,
    pub patch: usize,
}

impl Default for SpmParams {
    fn default() -> Self {
        Self {
            vocab_size: 200,
            levels: 2,
            step: 8,
            patch: 16,
        }
    }
}

impl SpmParams {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.step == 0 || self.patch < CELLS {
            return Err(Error::InvalidArgument(format!("invalid SPM parameters {self:?}")));
        }
        Ok(())
    }

    pub fn vector_len(&self) -> usize {
        pyramid_len(self.vocab_size, self.levels)
    }
}

/// Pools descriptors from `images` and clusters them.
pub fn spm_vocabulary(images: &[GrayImage], params: &SpmParams, rng: &mut Rng) -> Result<Vocabulary> {
    params.validate()?;
    let per_image: Vec<Vec<LocalDescriptor>> = images
        .par_iter()
        .map(|img| dense_descriptors(img, params.step, params.patch))
        .collect::<Result<_>>()?;
    let pooled = descriptor_matrix(per_image.iter().flatten());
    build_vocabulary(&pooled, params.vocab_size, rng)
}

/// Pyramid vector of every image, in input order.
pub fn pyramid_vectors(images: &[GrayImage], vocab: &Vocabulary, params: &SpmParams) -> Result<Vec<PyramidVector>> {
    params.validate()?;
    images
        .par_iter()
        .map(|img| {
            let descs = dense_descriptors(img, params.step, params.patch)?;
            pyramid_vector(&descs, img.dims(), vocab, params.levels)
        })
        .collect()
}

/// Symmetric matrix of pairwise pyramid match similarities.
pub fn similarity_matrix(vectors: &[PyramidVector]) -> Result<Matrix> {
    let n = vectors.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Ok(1.0) } else { pyramid_match_similarity(&vectors[i], &vectors[j]) })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Matrix::from_rows(&rows)
}
