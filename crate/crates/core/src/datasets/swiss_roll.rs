use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::distances::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

pub const T_MIN: f64 = 1.5 * PI;
pub const T_MAX: f64 = 4.5 * PI;
pub const HEIGHT: f64 = 20.0;

/// Fractional part of the golden ratio, used for low-discrepancy heights.
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwissRollSpec {
    pub n: usize,
    /// Standard deviation of isotropic Gaussian noise added to each point.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SwissRollSpec {
    fn default() -> Self {
        Self {
            n: 591,
            noise: 0.0,
            seed: 0,
        }
    }
}

/// Arc length of the spiral `(t cos t, t sin t)` from 0 to `t`.
fn arc_length(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

/// Inverse of `arc_length` by Newton's method (the derivative is `sqrt(1 + t²)`).
fn arc_to_t(s: f64) -> f64 {
    let mut t = (2.0 * s).sqrt().max(T_MIN);
    for _ in 0..50 {
        let step = (arc_length(t) - s) / (1.0 + t * t).sqrt();
        t -= step;
        if step.abs() < 1e-14 * t {
            break;
        }
    }
    t
}

/// Points `(t cos t, h, t sin t)` spread near-uniformly over the surface:
/// arc length is stratified into `n` jittered slots and heights follow a
/// jittered golden-ratio sequence.
pub fn swiss_roll(spec: &SwissRollSpec) -> Result<PointCloud> {
    if spec.n < 4 {
        return Err(Error::InvalidArgument(format!("swiss roll needs at least 4 points, got {}", spec.n)));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise must be non-negative, got {}", spec.noise)));
    }
    let mut rng = Rng::derive(spec.seed, "swiss-roll");
    let (s0, s1) = (arc_length(T_MIN), arc_length(T_MAX));
    let n = spec.n;
    let mut points = Matrix::zeros(n, 3);
    for k in 0..n {
        let u = (k as f64 + rng.uniform()) / n as f64;
        let t = arc_to_t(s0 + u * (s1 - s0));
        let jitter = (rng.uniform() - 0.5) / n as f64;
        let h = HEIGHT * ((k as f64 + 0.5) * GOLDEN + jitter).rem_euclid(1.0);
        let row = points.row_mut(k);
        row[0] = t * t.cos();
        row[1] = h;
        row[2] = t * t.sin();
        if spec.noise > 0.0 {
            row.iter_mut().for_each(|v| *v += spec.noise * rng.normal());
        }
    }
    PointCloud::new(points)
}

/// Surface coordinates `(arc length, height)` of each point, for checking
/// how well an embedding unrolls the surface. Only exact without noise.
pub fn unrolled_coordinates(pc: &PointCloud) -> Matrix {
    Matrix::from_fn(pc.len(), 2, |i, j| {
        let p = pc.points.row(i);
        if j == 1 {
            return p[1];
        }
        let r = p[0].hypot(p[2]);
        let mut angle = p[2].atan2(p[0]);
        // Choose the branch of the angle closest to the radius, since t = r.
        let turns = ((r - angle) / (2.0 * PI)).round();
        angle += turns * 2.0 * PI;
        arc_length(angle) - arc_length(T_MIN)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::geodesic_distance_matrix;
    use crate::linalg::euclidean;

    #[test]
    fn count_and_determinism() {
        let spec = SwissRollSpec { seed: 3, ..Default::default() };
        let a = swiss_roll(&spec).unwrap();
        assert_eq!(a.len(), 591);
        assert_eq!(a, swiss_roll(&spec).unwrap());
        assert_ne!(a, swiss_roll(&SwissRollSpec { seed: 4, ..spec }).unwrap());
    }

    #[test]
    fn points_lie_on_the_surface() {
        let pc = swiss_roll(&SwissRollSpec { n: 200, ..Default::default() }).unwrap();
        for p in pc.points.iter_rows() {
            let t = p[0].hypot(p[2]);
            assert!((T_MIN - 1e-9..=T_MAX + 1e-9).contains(&t));
            assert!((t * t.cos() - p[0]).abs() < 1e-9 && (t * t.sin() - p[2]).abs() < 1e-9);
            assert!((0.0..=HEIGHT).contains(&p[1]));
        }
    }

    #[test]
    fn arc_length_inverts() {
        for t in [T_MIN, 7.0, 10.0, T_MAX] {
            assert!((arc_to_t(arc_length(t)) - t).abs() < 1e-10);
        }
    }

    #[test]
    fn geodesic_extent_exceeds_euclidean_extent() {
        let pc = swiss_roll(&SwissRollSpec::default()).unwrap();
        let d = geodesic_distance_matrix(&pc, 8).unwrap();
        let mut euclid = 0.0f64;
        for i in 0..pc.len() {
            for j in 0..pc.len() {
                euclid = euclid.max(euclidean(pc.points.row(i), pc.points.row(j)));
            }
        }
        let unrolled = arc_length(T_MAX) - arc_length(T_MIN);
        assert!(unrolled > 2.0 * euclid);
        assert!(d.max_value() > 2.0 * euclid);
    }

    #[test]
    fn unrolled_coordinates_recover_arc_length() {
        let pc = swiss_roll(&SwissRollSpec { n: 50, ..Default::default() }).unwrap();
        let u = unrolled_coordinates(&pc);
        let total = arc_length(T_MAX) - arc_length(T_MIN);
        for i in 0..50 {
            assert!(u[(i, 0)] >= -1e-9 && u[(i, 0)] <= total + 1e-9);
        }
        // Stratification keeps points ordered along the spiral.
        for i in 1..50 {
            assert!(u[(i, 0)] > u[(i - 1, 0)]);
        }
    }

    #[test]
    fn rejects_tiny_rolls() {
        assert!(swiss_roll(&SwissRollSpec { n: 3, ..Default::default() }).is_err());
    }
}
