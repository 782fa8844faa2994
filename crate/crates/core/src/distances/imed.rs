//! Image Euclidean distance (IMED) and its standardizing transform.
//!
//! IMED weights the product of intensity differences at every pair of pixel
//! locations by `f(‖p - p'‖)`, here the normalized Gaussian
//! `f(t) = exp(-t² / 2σ²) / (2πσ²)`. Writing the weights as a matrix `G`
//! over flattened pixels, `imed(a, b)² = (a - b)ᵀ G (a - b)`, so the
//! distance equals the plain Euclidean distance between `G^{1/2} a` and
//! `G^{1/2} b`. The Gaussian weight factorizes over rows and columns,
//! `G = G_rows ⊗ G_cols`, which gives both the quadratic form and the
//! square root exactly from two small matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix};

use super::GrayImage;

/// Eigenvalues this far below zero (relative to the largest) are treated as
/// rounding noise and clipped.
const PSD_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImedParams {
    pub sigma: f64,
}

impl Default for ImedParams {
    fn default() -> Self {
        Self { sigma: 1.0 }
    }
}

impl ImedParams {
    pub fn new(sigma: f64) -> Result<Self> {
        let p = Self { sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "IMED sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// `f(t)` for an inter-pixel distance `t`.
    pub fn weight(&self, t: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (-t * t / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2)
    }
}

/// Symmetric PSD square root `V diag(sqrt(max(λ, 0))) Vᵀ`.
pub fn psd_sqrt(g: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(g)?;
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    if let Some(&worst) = eig.eigenvalues.last() {
        if worst < -PSD_CLIP * top {
            return Err(Error::numerical(format!(
                "weight matrix is not positive semidefinite (eigenvalue {worst:e})"
            )));
        }
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// One-dimensional factor `exp(-(i-j)² / 2σ²) / (sqrt(2π) σ)`.
fn axis_weights(len: usize, sigma: f64) -> Matrix {
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    Matrix::from_fn(len, len, |i, j| {
        let t = i as f64 - j as f64;
        norm * (-t * t / (2.0 * sigma * sigma)).exp()
    })
}

/// IMED for a fixed image size, with the weight factors and their square
/// roots precomputed.
#[derive(Debug, Clone)]
pub struct Imed {
    height: usize,
    width: usize,
    params: ImedParams,
    row_weights: Matrix,
    col_weights: Matrix,
    row_sqrt: Matrix,
    col_sqrt: Matrix,
}

impl Imed {
    pub fn new(height: usize, width: usize, params: ImedParams) -> Result<Self> {
        params.validate()?;
        let row_weights = axis_weights(height, params.sigma);
        let col_weights = axis_weights(width, params.sigma);
        let row_sqrt = psd_sqrt(&row_weights)?;
        let col_sqrt = psd_sqrt(&col_weights)?;
        Ok(Self {
            height,
            width,
            params,
            row_weights,
            col_weights,
            row_sqrt,
            col_sqrt,
        })
    }

    pub fn params(&self) -> ImedParams {
        self.params
    }

    fn check(&self, img: &GrayImage) -> Result<()> {
        if img.dims() != (self.height, self.width) {
            return Err(Error::Dimension(format!(
                "IMED prepared for {}x{} images, got {}x{}",
                self.height,
                self.width,
                img.height(),
                img.width()
            )));
        }
        Ok(())
    }

    /// `G^{1/2}` applied to the flattened image.
    pub fn transform(&self, img: &GrayImage) -> Result<GrayImage> {
        self.check(img)?;
        let out = self.row_sqrt.matmul(&img.to_matrix())?.matmul(&self.col_sqrt)?;
        Ok(GrayImage::from_matrix(&out))
    }

    /// `sqrt((a - b)ᵀ G (a - b))`, evaluated without square roots of `G`.
    pub fn distance(&self, a: &GrayImage, b: &GrayImage) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let diff = Matrix::from_fn(self.height, self.width, |r, c| a.get(r, c) - b.get(r, c));
        let weighted = self.row_weights.matmul(&diff)?.matmul(&self.col_weights)?;
        let q: f64 = diff.as_slice().iter().zip(weighted.as_slice()).map(|(x, y)| x * y).sum();
        Ok(q.max(0.0).sqrt())
    }
}

pub fn imed(a: &GrayImage, b: &GrayImage, params: &ImedParams) -> Result<f64> {
    a.same_size(b)?;
    Imed::new(a.height(), a.width(), *params)?.distance(a, b)
}

pub fn standardizing_transform(img: &GrayImage, params: &ImedParams) -> Result<GrayImage> {
    Imed::new(img.height(), img.width(), *params)?.transform(img)
}

/// Explicit `P x P` weight matrix over flattened pixels, `P = height * width`.
pub fn weight_matrix(height: usize, width: usize, f: impl Fn(f64) -> f64) -> Matrix {
    let p = height * width;
    Matrix::from_fn(p, p, |a, b| {
        let (ra, ca) = ((a / width) as f64, (a % width) as f64);
        let (rb, cb) = ((b / width) as f64, (b % width) as f64);
        f(((ra - rb).powi(2) + (ca - cb).powi(2)).sqrt())
    })
}

/// IMED with an arbitrary explicit weight matrix (small images only).
pub fn imed_with_weights(a: &GrayImage, b: &GrayImage, g: &Matrix) -> Result<f64> {
    a.same_size(b)?;
    let diff: Vec<f64> = a.pixels().iter().zip(b.pixels()).map(|(x, y)| x - y).collect();
    let gd = g.matvec(&diff)?;
    let q: f64 = diff.iter().zip(&gd).map(|(x, y)| x * y).sum();
    Ok(q.max(0.0).sqrt())
}

/// Standardizing transform from an explicit weight matrix: symmetrizes `g`,
/// clips rounding-level negative eigenvalues, and applies `g^{1/2}`.
pub fn standardizing_transform_with_weights(img: &GrayImage, g: &Matrix) -> Result<GrayImage> {
    if g.rows() != img.pixels().len() || !g.is_square() {
        return Err(Error::Dimension(format!(
            "weight matrix is {}x{} but the image has {} pixels",
            g.rows(),
            g.cols(),
            img.pixels().len()
        )));
    }
    let sym = Matrix::from_fn(g.rows(), g.cols(), |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
    let root = psd_sqrt(&sym)?;
    let out = root.matvec(img.pixels())?;
    GrayImage::new(img.height(), img.width(), out)
}

/// Approximate standardizing transform: separable convolution with the
/// Gaussian square-root kernel (σ/√2), truncated at radius `3σ`, zero padded.
/// Close to the exact transform away from the borders only.
pub fn standardizing_transform_approx(img: &GrayImage, params: &ImedParams) -> Result<GrayImage> {
    params.validate()?;
    let s = params.sigma;
    let radius = (3.0 * s).ceil() as isize;
    let norm = 1.0 / (std::f64::consts::PI.sqrt() * s);
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|t| norm * (-(t * t) as f64 / (s * s)).exp())
        .collect();
    let (h, w) = img.dims();
    let conv_rows = GrayImage::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .filter_map(|(k, &kv)| {
                let cc = c as isize + k as isize - radius;
                (0..w as isize).contains(&cc).then(|| kv * img.get(r, cc as usize))
            })
            .sum()
    });
    Ok(GrayImage::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .filter_map(|(k, &kv)| {
                let rr = r as isize + k as isize - radius;
                (0..h as isize).contains(&rr).then(|| kv * conv_rows.get(rr as usize, c))
            })
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::euclidean_distance;
    use crate::rng::Rng;

    fn random_image(h: usize, w: usize, rng: &mut Rng) -> GrayImage {
        GrayImage::from_fn(h, w, |_, _| rng.uniform())
    }

    #[test]
    fn identical_images_are_at_zero() {
        let mut rng = Rng::new(1);
        let a = random_image(5, 7, &mut rng);
        assert_eq!(imed(&a, &a, &ImedParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn delta_weights_reduce_to_euclidean() {
        let mut rng = Rng::new(2);
        let a = random_image(4, 5, &mut rng);
        let b = random_image(4, 5, &mut rng);
        let g = weight_matrix(4, 5, |t| if t == 0.0 { 1.0 } else { 0.0 });
        let d = imed_with_weights(&a, &b, &g).unwrap();
        assert!((d - euclidean_distance(&a, &b).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn separable_path_matches_explicit_weights() {
        let mut rng = Rng::new(3);
        let p = ImedParams::default();
        let g = weight_matrix(6, 5, |t| p.weight(t));
        for _ in 0..5 {
            let a = random_image(6, 5, &mut rng);
            let b = random_image(6, 5, &mut rng);
            let explicit = imed_with_weights(&a, &b, &g).unwrap();
            let fast = imed(&a, &b, &p).unwrap();
            assert!((explicit - fast).abs() <= 1e-12 * explicit);
            let st_explicit = standardizing_transform_with_weights(&a, &g).unwrap();
            let st_fast = standardizing_transform(&a, &p).unwrap();
            for (x, y) in st_explicit.pixels().iter().zip(st_fast.pixels()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn transform_is_linear() {
        let mut rng = Rng::new(4);
        let a = random_image(5, 6, &mut rng);
        let p = ImedParams::default();
        let st = standardizing_transform(&a, &p).unwrap();
        let st_scaled = standardizing_transform(&a.map(|v| 0.3 * v), &p).unwrap();
        for (x, y) in st.pixels().iter().zip(st_scaled.pixels()) {
            assert!((0.3 * x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn row_normalized_weights_keep_constants() {
        // Periodic Gaussian weights on a 4x4 torus, rows normalized to sum to 1.
        // σ = 0.5 keeps the circulant weights positive definite.
        let (h, w) = (4usize, 4usize);
        let p = ImedParams::new(0.5).unwrap();
        let wrap = |d: usize, len: usize| d.min(len - d) as f64;
        let mut g = Matrix::from_fn(h * w, h * w, |a, b| {
            let dr = wrap((a / w).abs_diff(b / w), h);
            let dc = wrap((a % w).abs_diff(b % w), w);
            p.weight((dr * dr + dc * dc).sqrt())
        });
        let row_sum: f64 = g.row(0).iter().sum();
        g.scale(1.0 / row_sum);
        let img = GrayImage::filled(h, w, 0.7);
        let st = standardizing_transform_with_weights(&img, &g).unwrap();
        assert!(st.pixels().iter().all(|&v| (v - 0.7).abs() < 1e-10));
    }

    #[test]
    fn approximate_transform_tracks_exact_in_the_interior() {
        let mut rng = Rng::new(5);
        let a = random_image(20, 20, &mut rng);
        let p = ImedParams::default();
        let exact = standardizing_transform(&a, &p).unwrap();
        let approx = standardizing_transform_approx(&a, &p).unwrap();
        let mut worst = 0.0f64;
        for r in 6..14 {
            for c in 6..14 {
                worst = worst.max((exact.get(r, c) - approx.get(r, c)).abs());
            }
        }
        assert!(worst < 0.05, "interior deviation {worst}");
    }

    #[test]
    fn errors() {
        let a = GrayImage::filled(2, 2, 0.0);
        let b = GrayImage::filled(2, 3, 0.0);
        assert!(matches!(imed(&a, &b, &ImedParams::default()), Err(Error::Dimension(_))));
        assert!(ImedParams::new(0.0).is_err());
        let not_psd = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let img = GrayImage::new(1, 2, vec![0.2, 0.4]).unwrap();
        assert!(matches!(
            standardizing_transform_with_weights(&img, &not_psd),
            Err(Error::Numerical { .. })
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn symmetric_and_non_negative(seed in proptest::prelude::any::<u64>()) {
            let mut rng = Rng::new(seed);
            let a = random_image(6, 4, &mut rng);
            let b = random_image(6, 4, &mut rng);
            let p = ImedParams::default();
            let ab = imed(&a, &b, &p).unwrap();
            let ba = imed(&b, &a, &p).unwrap();
            proptest::prop_assert!(ab >= 0.0);
            proptest::prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1e-300));
        }
    }
}
