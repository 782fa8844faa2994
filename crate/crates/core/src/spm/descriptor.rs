use std::f64::consts::PI;

use crate::distances::GrayImage;
use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};

pub const CELLS: usize = 4;
pub const ORIENTATIONS: usize = 8;
pub const DESCRIPTOR_LEN: usize = CELLS * CELLS * ORIENTATIONS;

/// Entries are clipped here after the first normalization.
const CLIP: f64 = 0.2;

/// A gradient-orientation histogram over one square patch.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDescriptor {
    /// Patch center, in pixels.
    pub row: f64,
    pub col: f64,
    /// `CELLS x CELLS x ORIENTATIONS`, cell-major; unit length or all zero.
    pub vector: Vec<f64>,
}

impl LocalDescriptor {
    pub fn is_zero(&self) -> bool {
        self.vector.iter().all(|&v| v == 0.0)
    }
}

/// Number of patch origins along one axis.
pub fn grid_len(extent: usize, patch: usize, step: usize) -> usize {
    if patch > extent {
        0
    } else {
        (extent - patch) / step + 1
    }
}

/// Central-difference gradients with clamped borders.
fn gradients(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (h, w) = img.dims();
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let left = img.get(r, c.saturating_sub(1));
            let right = img.get(r, (c + 1).min(w - 1));
            let up = img.get(r.saturating_sub(1), c);
            let down = img.get((r + 1).min(h - 1), c);
            gx[r * w + c] = 0.5 * (right - left);
            gy[r * w + c] = 0.5 * (down - up);
        }
    }
    (gx, gy)
}

fn normalize(v: &mut [f64]) -> bool {
    let n = norm(v);
    if n < 1e-12 {
        v.iter_mut().for_each(|x| *x = 0.0);
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Dense descriptors on a regular grid of `patch x patch` windows spaced
/// `step` apart, in row-major grid order.
pub fn dense_descriptors(img: &GrayImage, step: usize, patch: usize) -> Result<Vec<LocalDescriptor>> {
    let (h, w) = img.dims();
    if step == 0 || patch < CELLS {
        return Err(Error::InvalidArgument(format!(
            "step must be positive and patch at least {CELLS} (got step {step}, patch {patch})"
        )));
    }
    if patch > h || patch > w {
        return Err(Error::InvalidArgument(format!(
            "{h}x{w} image is smaller than the {patch}-pixel patch"
        )));
    }
    let (gx, gy) = gradients(img);
    let bin_width = 2.0 * PI / ORIENTATIONS as f64;
    let mut out = Vec::with_capacity(grid_len(h, patch, step) * grid_len(w, patch, step));
    for gr in 0..grid_len(h, patch, step) {
        for gc in 0..grid_len(w, patch, step) {
            let (r0, c0) = (gr * step, gc * step);
            let mut vector = vec![0.0; DESCRIPTOR_LEN];
            for dr in 0..patch {
                for dc in 0..patch {
                    let idx = (r0 + dr) * w + c0 + dc;
                    let (x, y) = (gx[idx], gy[idx]);
                    let mag = x.hypot(y);
                    if mag == 0.0 {
                        continue;
                    }
                    let cell = (dr * CELLS / patch) * CELLS + dc * CELLS / patch;
                    // Linear interpolation between the two nearest orientation bins.
                    let pos = y.atan2(x).rem_euclid(2.0 * PI) / bin_width;
                    let lo = pos.floor();
                    let frac = pos - lo;
                    let b0 = lo as usize % ORIENTATIONS;
                    let b1 = (b0 + 1) % ORIENTATIONS;
                    vector[cell * ORIENTATIONS + b0] += mag * (1.0 - frac);
                    vector[cell * ORIENTATIONS + b1] += mag * frac;
                }
            }
            if normalize(&mut vector) {
                vector.iter_mut().for_each(|v| *v = v.min(CLIP));
                normalize(&mut vector);
            }
            out.push(LocalDescriptor {
                row: r0 as f64 + patch as f64 / 2.0,
                col: c0 as f64 + patch as f64 / 2.0,
                vector,
            });
        }
    }
    Ok(out)
}

/// Stacks descriptor vectors into an `n x DESCRIPTOR_LEN` matrix.
pub fn descriptor_matrix<'a>(descs: impl IntoIterator<Item = &'a LocalDescriptor>) -> Matrix {
    let mut data = Vec::new();
    let mut rows = 0;
    for d in descs {
        data.extend_from_slice(&d.vector);
        rows += 1;
    }
    Matrix::from_vec(rows, DESCRIPTOR_LEN, data).expect("descriptor vectors have fixed length")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_image_gives_zero_descriptors() {
        let d = dense_descriptors(&GrayImage::filled(32, 32, 0.4), 8, 16).unwrap();
        assert_eq!(d.len(), 9);
        assert!(d.iter().all(LocalDescriptor::is_zero));
    }

    #[test]
    fn grid_count_for_car_sized_images() {
        let img = GrayImage::from_fn(40, 100, |r, c| ((r * 7 + c * 3) % 11) as f64 / 10.0);
        let d = dense_descriptors(&img, 8, 16).unwrap();
        assert_eq!(d.len(), 4 * 11);
        for desc in &d {
            assert!(desc.is_zero() || (norm(&desc.vector) - 1.0).abs() < 1e-6);
            assert!(desc.vector.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn vertical_edge_fills_horizontal_gradient_bins() {
        let img = GrayImage::from_fn(16, 32, |_, c| if c < 16 { 0.0 } else { 1.0 });
        let d = dense_descriptors(&img, 8, 16).unwrap();
        // Window at column offset 8 straddles the edge.
        let desc = &d[1];
        let mut per_bin = [0.0; ORIENTATIONS];
        for (i, v) in desc.vector.iter().enumerate() {
            per_bin[i % ORIENTATIONS] += v;
        }
        let argmax = (0..ORIENTATIONS).max_by(|&a, &b| per_bin[a].total_cmp(&per_bin[b])).unwrap();
        // Intensity increases with column: gradient points along +x, angle 0.
        assert_eq!(argmax, 0);
        assert!(per_bin[0] > 0.9 * per_bin.iter().sum::<f64>());
    }

    #[test]
    fn rejects_small_images() {
        assert!(dense_descriptors(&GrayImage::filled(10, 40, 0.0), 8, 16).is_err());
        assert!(dense_descriptors(&GrayImage::filled(40, 40, 0.0), 0, 16).is_err());
    }
}
