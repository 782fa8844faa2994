use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{euclidean, Matrix};
use crate::mds::DistanceMatrix;

/// Points in `R^d`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Matrix,
}

impl PointCloud {
    pub fn new(points: Matrix) -> Result<Self> {
        if !points.is_finite() {
            return Err(Error::Range("point cloud has non-finite coordinates".into()));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }
}

/// Adjacency lists of the symmetric k-nearest-neighbor graph: an edge is kept
/// when either endpoint lists the other among its `k` nearest.
pub fn knn_graph(pc: &PointCloud, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = pc.len();
    let pts = &pc.points;
    let neighbors: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclidean(pts.row(i), pts.row(j)), j))
                .collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cand.truncate(k);
            cand.into_iter().map(|(d, j)| (j, d)).collect()
        })
        .collect();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, list) in neighbors.iter().enumerate() {
        for &(j, d) in list {
            adj[i].push((j, d));
            adj[j].push((i, d));
        }
    }
    for list in &mut adj {
        list.sort_by_key(|e| e.0);
        list.dedup_by_key(|e| e.0);
    }
    adj
}

fn components(adj: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance.
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([Frontier(0.0, source)]);
    while let Some(Frontier(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier(nd, v));
            }
        }
    }
    dist
}

/// Shortest-path distances through the symmetric k-NN graph.
pub fn geodesic_distance_matrix(pc: &PointCloud, k: usize) -> Result<DistanceMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("k-neighbors must be at least 1".into()));
    }
    let n = pc.len();
    let adj = knn_graph(pc, k);
    let comps = components(&adj);
    if comps.len() > 1 {
        let smallest = comps
            .into_iter()
            .min_by(|a, b| a.len().cmp(&b.len()).then(a[0].cmp(&b[0])))
            .unwrap();
        return Err(Error::Connectivity { component: smallest });
    }
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&adj, s)).collect();
    DistanceMatrix::from_fn(n, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(rows: &[Vec<f64>]) -> PointCloud {
        PointCloud::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn path_graph_on_a_line() {
        let pc = cloud(&(0..5).map(|i| vec![i as f64, 0.0, 0.0]).collect::<Vec<_>>());
        let d = geodesic_distance_matrix(&pc, 2).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((d.get(i, j) - (i as f64 - j as f64).abs()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn arc_distance_is_sum_of_chords() {
        let theta: f64 = 0.4;
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|k| vec![(k as f64 * theta).cos(), (k as f64 * theta).sin()])
            .collect();
        let d = geodesic_distance_matrix(&cloud(&pts), 1).unwrap();
        let chord = 2.0 * (theta / 2.0).sin();
        assert!((d.get(0, 2) - 2.0 * chord).abs() < 1e-12);
        // The straight chord 0-2 is shorter but not an edge.
        assert!(d.get(0, 2) > 2.0 * (theta).sin());
    }

    #[test]
    fn disconnected_graph_names_smallest_component() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![100.0, 0.0],
            vec![101.0, 0.0],
        ];
        match geodesic_distance_matrix(&cloud(&pts), 1) {
            Err(Error::Connectivity { component }) => assert_eq!(component, vec![3, 4]),
            other => panic!("expected connectivity error, got {other:?}"),
        }
    }

    #[test]
    fn satisfies_triangle_inequality() {
        let mut rng = crate::rng::Rng::new(6);
        let pc = PointCloud::new(Matrix::from_fn(40, 3, |_, _| rng.uniform())).unwrap();
        let d = geodesic_distance_matrix(&pc, 6).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                for k in 0..40 {
                    assert!(d.get(i, j) <= d.get(i, k) + d.get(k, j) + 1e-12);
                }
            }
        }
    }
}
