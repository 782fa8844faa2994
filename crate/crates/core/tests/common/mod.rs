#![allow(dead_code)]

use std::path::{Path, PathBuf};

use mdsfeat::{GrayImage, LabeledImageSet, Matrix, Rng};

/// Striped images: "car" items carry vertical stripes, "non-car" horizontal
/// ones, each with a random phase and pixel noise.
pub fn striped_dataset(per_class: usize, height: usize, width: usize, seed: u64) -> LabeledImageSet {
    let mut rng = Rng::new(seed);
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut paths = Vec::new();
    for (class, name) in ["car", "non-car"].iter().enumerate() {
        for k in 0..per_class {
            let phase = rng.uniform() * std::f64::consts::TAU;
            let period = 5.0 + 3.0 * rng.uniform();
            let mut noise = vec![0.0; height * width];
            for v in &mut noise {
                *v = 0.1 * rng.uniform();
            }
            let img = GrayImage::from_fn(height, width, |r, c| {
                let t = if class == 0 { c } else { r } as f64;
                0.45 + 0.4 * (t * std::f64::consts::TAU / period + phase).sin() + noise[r * width + c]
            });
            images.push(img);
            labels.push(class);
            paths.push(PathBuf::from(format!("{name}/{k:03}.pgm")));
        }
    }
    LabeledImageSet {
        images,
        labels,
        class_names: vec!["car".into(), "non-car".into()],
        paths,
        convention: "synthetic".into(),
    }
}

/// `n` points drawn uniformly from `[-1, 1]^d`.
pub fn random_points(n: usize, d: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(n, d, |_, _| rng.uniform_range(-1.0, 1.0))
}

/// Relative paths of every regular file under `dir`, sorted.
pub fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}
