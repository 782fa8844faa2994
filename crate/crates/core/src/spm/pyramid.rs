use std::path::Path;

use super::descriptor::LocalDescriptor;
use super::vocabulary::Vocabulary;
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::Matrix;

/// Total histogram length for `size` words and levels `0..=levels`.
pub fn pyramid_len(size: usize, levels: usize) -> usize {
    size * (4usize.pow(levels as u32 + 1) - 1) / 3
}

/// Weight applied to level `l` of an `levels`-level pyramid.
pub fn level_weight(l: usize, levels: usize) -> f64 {
    if l == 0 {
        1.0 / 2f64.powi(levels as i32)
    } else {
        1.0 / 2f64.powi((levels - l + 1) as i32)
    }
}

/// Weighted multi-level visual-word histogram of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidVector {
    pub levels: usize,
    pub vocab_size: usize,
    /// Level 0 first; within a level, cells in row-major order, each holding
    /// `vocab_size` bins.
    pub histogram: Vec<f64>,
    /// Descriptors that were assigned a word (zero descriptors are skipped).
    pub descriptor_count: usize,
}

impl PyramidVector {
    pub fn len(&self) -> usize {
        self.histogram.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptor_count == 0
    }

    /// Offset of the first bin of `level`.
    pub fn level_offset(&self, level: usize) -> usize {
        pyramid_len(self.vocab_size, level) - self.vocab_size * 4usize.pow(level as u32)
    }

    /// Bins of `level` with the level weight removed.
    pub fn unweighted_level(&self, level: usize) -> Vec<f64> {
        let start = self.level_offset(level);
        let len = self.vocab_size * 4usize.pow(level as u32);
        let w = level_weight(level, self.levels);
        self.histogram[start..start + len].iter().map(|v| v / w).collect()
    }
}

/// Builds the pyramid from descriptors of an `h x w` image.
///
/// Zero descriptors carry no visual word and are skipped. When nothing is
/// left the vector is all zeros with `descriptor_count == 0`.
pub fn pyramid_vector(
    descs: &[LocalDescriptor],
    (h, w): (usize, usize),
    vocab: &Vocabulary,
    levels: usize,
) -> Result<PyramidVector> {
    let m = vocab.size();
    let mut histogram = vec![0.0; pyramid_len(m, levels)];
    let mut count = 0usize;
    for d in descs.iter().filter(|d| !d.is_zero()) {
        if !(d.row >= 0.0 && d.row < h as f64 && d.col >= 0.0 && d.col < w as f64) {
            return Err(Error::Range(format!(
                "descriptor at ({}, {}) lies outside the {h}x{w} image",
                d.row, d.col
            )));
        }
        let word = vocab.word(&d.vector);
        let mut offset = 0;
        for l in 0..=levels {
            let side = 1usize << l;
            let cy = ((d.row * side as f64 / h as f64) as usize).min(side - 1);
            let cx = ((d.col * side as f64 / w as f64) as usize).min(side - 1);
            histogram[offset + (cy * side + cx) * m + word] += level_weight(l, levels);
            offset += side * side * m;
        }
        count += 1;
    }
    if count == 0 {
        log::warn!("image has no informative descriptors; its pyramid vector is all zeros");
    } else {
        let inv = 1.0 / count as f64;
        histogram.iter_mut().for_each(|v| *v *= inv);
    }
    Ok(PyramidVector {
        levels,
        vocab_size: m,
        histogram,
        descriptor_count: count,
    })
}

fn intersection(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).sum()
}

/// Weighted histogram intersection normalized so that `K(a, a) = 1`.
pub fn pyramid_match_similarity(a: &PyramidVector, b: &PyramidVector) -> Result<f64> {
    if a.levels != b.levels || a.vocab_size != b.vocab_size || a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "pyramid parameters differ: (M={}, L={}) vs (M={}, L={})",
            a.vocab_size, a.levels, b.vocab_size, b.levels
        )));
    }
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let norm = (intersection(&a.histogram, &a.histogram) * intersection(&b.histogram, &b.histogram)).sqrt();
    Ok((intersection(&a.histogram, &b.histogram) / norm).clamp(0.0, 1.0))
}

/// Writes one vector per row, prefixed by its descriptor count.
pub fn save_pyramid_vectors(path: &Path, vectors: &[PyramidVector]) -> Result<()> {
    let Some(first) = vectors.first() else {
        return Err(Error::EmptyDataset("no pyramid vectors to write".into()));
    };
    let cols = first.len() + 1;
    let mut data = Vec::with_capacity(vectors.len() * cols);
    for v in vectors {
        if v.len() + 1 != cols {
            return Err(Error::Dimension("pyramid vectors differ in length".into()));
        }
        data.push(v.descriptor_count as f64);
        data.extend_from_slice(&v.histogram);
    }
    let mut header = vec!["descriptor_count".to_owned()];
    header.extend((0..first.len()).map(|i| format!("bin{i}")));
    io::save_matrix_csv(path, &Matrix::from_vec(vectors.len(), cols, data)?, Some(&header))
}

pub fn load_pyramid_vectors(path: &Path, vocab_size: usize, levels: usize) -> Result<Vec<PyramidVector>> {
    let (_, m) = io::load_matrix_csv(path, true)?;
    let expected = pyramid_len(vocab_size, levels) + 1;
    if m.cols() != expected {
        return Err(Error::Dimension(format!(
            "{} has {} columns, expected {expected} for M={vocab_size}, L={levels}",
            path.display(),
            m.cols()
        )));
    }
    Ok(m.iter_rows()
        .map(|row| PyramidVector {
            levels,
            vocab_size,
            histogram: row[1..].to_vec(),
            descriptor_count: row[0] as usize,
        })
        .collect())
}

/// Stacks histograms into an `n x len` matrix.
pub fn pyramid_matrix(vectors: &[PyramidVector]) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = vectors.iter().map(|v| v.histogram.clone()).collect();
    Matrix::from_rows(&rows)
}
