//! Lloyd's k-means with distance-weighted seeding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// `k x d`.
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after each assignment step.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn wcss(&self) -> f64 {
        self.wcss_history.last().copied().unwrap_or(0.0)
    }
}

/// Index of the nearest row of `centroids` and the squared distance to it.
/// Ties go to the lowest index.
pub fn nearest_centroid(centroids: &Matrix, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.iter_rows().enumerate() {
        let d = squared_distance(row, x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub fn kmeans(points: &Matrix, k: usize, rng: &mut Rng, max_iter: usize) -> Result<KMeansResult> {
    let n = points.rows();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the number of points ({n})"
        )));
    }
    let d = points.cols();
    let mut centroids = seed_centroids(points, k, rng);
    let mut assignments = vec![usize::MAX; n];
    let mut wcss_history = Vec::new();
    let mut iterations = 0;

    let max_iter = max_iter.max(1);
    for iter in 0..max_iter {
        iterations += 1;
        let nearest: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .map(|i| nearest_centroid(&centroids, points.row(i)))
            .collect();
        let changed = nearest
            .iter()
            .zip(&assignments)
            .any(|(&(c, _), &old)| c != old);
        for (a, &(c, _)) in assignments.iter_mut().zip(&nearest) {
            *a = c;
        }
        wcss_history.push(nearest.iter().map(|&(_, d2)| d2).sum());
        if !changed || iter + 1 == max_iter {
            break;
        }

        // Update step; an emptied cluster takes the point farthest from its centroid.
        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, &x) in sums.row_mut(c).iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        let mut dist: Vec<f64> = nearest.iter().map(|&(_, d2)| d2).collect();
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = farthest(&dist, &assignments, &counts);
            let old = assignments[far];
            counts[old] -= 1;
            for (s, &x) in sums.row_mut(old).iter_mut().zip(points.row(far)) {
                *s -= x;
            }
            assignments[far] = c;
            counts[c] = 1;
            sums.row_mut(c).copy_from_slice(points.row(far));
            dist[far] = 0.0;
        }
        for c in 0..k {
            let inv = 1.0 / counts[c] as f64;
            for (dst, &s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                *dst = s * inv;
            }
        }
    }

    Ok(KMeansResult {
        centroids,
        assignments,
        wcss_history,
        iterations,
    })
}

/// Point with the largest distance to its centroid whose cluster can spare it.
fn farthest(dist: &[f64], assignments: &[usize], counts: &[usize]) -> usize {
    let mut best = None;
    for (i, &d2) in dist.iter().enumerate() {
        if counts[assignments[i]] < 2 {
            continue;
        }
        match best {
            Some((_, bd)) if d2 <= bd => {}
            _ => best = Some((i, d2)),
        }
    }
    best.map(|(i, _)| i).expect("k <= n guarantees a donor cluster")
}

fn seed_centroids(points: &Matrix, k: usize, rng: &mut Rng) -> Matrix {
    let n = points.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.below(n));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just below `target`; fall back to the last positive weight.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            (0..n).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        let row = points.row(next);
        for (i, dist) in d2.iter_mut().enumerate() {
            *dist = dist.min(squared_distance(points.row(i), row));
        }
    }
    points.select_rows(&chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_blobs(rng: &mut Rng) -> (Matrix, [f64; 2], [f64; 2]) {
        let mut rows = Vec::new();
        for _ in 0..30 {
            rows.push(vec![rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0)]);
        }
        for _ in 0..30 {
            rows.push(vec![10.0 + rng.uniform_range(-1.0, 1.0), 10.0 + rng.uniform_range(-1.0, 1.0)]);
        }
        let mean = |rs: &[Vec<f64>]| {
            let n = rs.len() as f64;
            [rs.iter().map(|r| r[0]).sum::<f64>() / n, rs.iter().map(|r| r[1]).sum::<f64>() / n]
        };
        let (a, b) = (mean(&rows[..30]), mean(&rows[30..]));
        (Matrix::from_rows(&rows).unwrap(), a, b)
    }

    #[test]
    fn separates_two_blobs() {
        let mut rng = Rng::new(1);
        let (pts, ma, mb) = two_blobs(&mut rng);
        let res = kmeans(&pts, 2, &mut Rng::new(9), 100).unwrap();
        let ca = res.assignments[0];
        assert!(res.assignments[..30].iter().all(|&a| a == ca));
        assert!(res.assignments[30..].iter().all(|&a| a != ca));
        let c = &res.centroids;
        for (i, m) in [(ca, ma), (1 - ca, mb)] {
            assert!((c[(i, 0)] - m[0]).abs() < 1e-12 && (c[(i, 1)] - m[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn one_cluster_per_point() {
        let pts = Matrix::from_rows(&[vec![0.0, 1.0], vec![3.0, 2.0], vec![-1.0, 5.0]]).unwrap();
        let res = kmeans(&pts, 3, &mut Rng::new(2), 10).unwrap();
        assert_eq!(res.wcss(), 0.0);
        let mut a = res.assignments.clone();
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 2]);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let mut rng = Rng::new(4);
        let pts = Matrix::from_fn(17, 3, |_, _| rng.normal());
        let res = kmeans(&pts, 1, &mut Rng::new(0), 10).unwrap();
        for (c, m) in res.centroids.row(0).iter().zip(pts.column_means()) {
            assert!((c - m).abs() < 1e-12);
        }
    }

    #[test]
    fn too_many_clusters_is_rejected() {
        let pts = Matrix::zeros(2, 2);
        assert!(matches!(kmeans(&pts, 3, &mut Rng::new(0), 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn duplicate_points_do_not_break_clustering() {
        // Only two distinct values exist, so one of the three clusters keeps
        // getting reseeded; the result must still be a valid partition.
        let pts = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0], vec![2.0]]).unwrap();
        let res = kmeans(&pts, 3, &mut Rng::new(0), 10).unwrap();
        assert!(res.centroids.is_finite());
        assert_eq!(res.wcss(), 0.0);
        for (i, &a) in res.assignments.iter().enumerate() {
            assert_eq!(a, nearest_centroid(&res.centroids, pts.row(i)).0);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn objective_never_increases(seed in proptest::prelude::any::<u64>(), k in 1usize..8) {
            let mut rng = Rng::new(seed);
            let pts = Matrix::from_fn(60, 4, |_, _| rng.normal());
            let res = kmeans(&pts, k, &mut rng, 50).unwrap();
            for w in res.wcss_history.windows(2) {
                proptest::prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
            for (i, &a) in res.assignments.iter().enumerate() {
                let (best, d2) = nearest_centroid(&res.centroids, pts.row(i));
                let da = squared_distance(res.centroids.row(a), pts.row(i));
                proptest::prop_assert!(best == a || (da - d2).abs() < 1e-12);
            }
        }
    }
}
