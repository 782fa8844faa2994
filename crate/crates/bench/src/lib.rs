//! Inputs shared by the benchmarks.

use mdsfeat::datasets::swiss_roll;
use mdsfeat::distances::geodesic_distance_matrix;
use mdsfeat::{DistanceMatrix, GrayImage, Matrix, Rng, SwissRollSpec};

/// Random symmetric `n x n` matrix.
pub fn symmetric(n: usize, seed: u64) -> Matrix {
    let mut rng = Rng::new(seed);
    let mut a = Matrix::from_fn(n, n, |_, _| rng.normal());
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    a
}

pub fn roll_distances(n: usize) -> DistanceMatrix {
    let pc = swiss_roll(&SwissRollSpec { n, ..SwissRollSpec::default() }).expect("valid roll");
    geodesic_distance_matrix(&pc, 8).expect("connected roll")
}

pub fn noise_image(h: usize, w: usize, seed: u64) -> GrayImage {
    let mut rng = Rng::new(seed);
    GrayImage::from_fn(h, w, |_, _| rng.uniform())
}
