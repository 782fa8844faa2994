use crate::linalg::Matrix;
use crate::lm::LeastSquaresProblem;

/// Offset used when the free point sits exactly on an anchor, where the
/// gradient of the Euclidean norm is undefined.
const COINCIDENT_OFFSET: f64 = 1e-9;

/// Which rows of the code matrix act as fixed anchors.
#[derive(Debug, Clone, Copy)]
pub enum Anchors<'a> {
    All,
    AllExcept(usize),
    Subset(&'a [usize]),
}

/// Places a single point `x` so that `‖x - a_i‖ ≈ t_i` for each anchor `i`.
/// Residuals are `‖x - a_i‖ - t_i`.
#[derive(Debug, Clone, Copy)]
pub struct AnchorProblem<'a> {
    codes: &'a Matrix,
    anchors: Anchors<'a>,
    /// Indexed by row of `codes`.
    targets: &'a [f64],
}

impl<'a> AnchorProblem<'a> {
    pub fn new(codes: &'a Matrix, anchors: Anchors<'a>, targets: &'a [f64]) -> Self {
        debug_assert_eq!(codes.rows(), targets.len());
        Self {
            codes,
            anchors,
            targets,
        }
    }

    fn for_each_anchor(&self, mut f: impl FnMut(usize, usize)) {
        match self.anchors {
            Anchors::All => (0..self.codes.rows()).enumerate().for_each(|(k, i)| f(k, i)),
            Anchors::AllExcept(skip) => (0..self.codes.rows())
                .filter(|&i| i != skip)
                .enumerate()
                .for_each(|(k, i)| f(k, i)),
            Anchors::Subset(idx) => idx.iter().enumerate().for_each(|(k, &i)| f(k, i)),
        }
    }

    /// Writes `x - a_i` into `diff` and returns its norm, nudged off zero
    /// along a fixed diagonal direction.
    #[inline]
    fn offset(&self, x: &[f64], i: usize, diff: &mut [f64]) -> f64 {
        let a = self.codes.row(i);
        let mut sq = 0.0;
        for ((d, xv), av) in diff.iter_mut().zip(x).zip(a) {
            *d = xv - av;
            sq += *d * *d;
        }
        if sq > 0.0 {
            return sq.sqrt();
        }
        let u = COINCIDENT_OFFSET / (diff.len() as f64).sqrt();
        diff.iter_mut().for_each(|d| *d = u);
        COINCIDENT_OFFSET
    }

    /// `‖x - a_i‖`, with the same convention at coincident points.
    #[inline]
    fn dist(&self, x: &[f64], i: usize) -> f64 {
        let sq: f64 = x.iter().zip(self.codes.row(i)).map(|(xv, av)| (xv - av) * (xv - av)).sum();
        if sq > 0.0 {
            sq.sqrt()
        } else {
            COINCIDENT_OFFSET
        }
    }

    /// Sum of squared residuals at `x`.
    pub fn cost(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        self.for_each_anchor(|_, i| {
            let e = self.dist(x, i) - self.targets[i];
            total += e * e;
        });
        total
    }
}

impl LeastSquaresProblem for AnchorProblem<'_> {
    fn num_params(&self) -> usize {
        self.codes.cols()
    }

    fn num_residuals(&self) -> usize {
        match self.anchors {
            Anchors::All => self.codes.rows(),
            Anchors::AllExcept(_) => self.codes.rows() - 1,
            Anchors::Subset(idx) => idx.len(),
        }
    }

    fn residuals(&self, x: &[f64], out: &mut [f64]) {
        self.for_each_anchor(|k, i| {
            out[k] = self.dist(x, i) - self.targets[i];
        });
    }

    fn jacobian(&self, x: &[f64], out: &mut Matrix) -> bool {
        self.for_each_anchor(|k, i| {
            let row = out.row_mut(k);
            let dist = self.offset(x, i, row);
            row.iter_mut().for_each(|o| *o /= dist);
        });
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::finite_difference_jacobian;
    use crate::rng::Rng;

    #[test]
    fn analytic_jacobian_matches_central_differences() {
        let mut rng = Rng::new(21);
        for m in 1..=4 {
            let codes = Matrix::from_fn(9, m, |_, _| rng.normal() * 3.0);
            let targets: Vec<f64> = (0..9).map(|_| rng.uniform_range(0.0, 5.0)).collect();
            let subset = [0, 2, 3, 7];
            for anchors in [Anchors::All, Anchors::AllExcept(4), Anchors::Subset(&subset)] {
                let prob = AnchorProblem::new(&codes, anchors, &targets);
                for _ in 0..10 {
                    let x: Vec<f64> = (0..m).map(|_| rng.normal() * 3.0).collect();
                    let r = prob.num_residuals();
                    let mut analytic = Matrix::zeros(r, m);
                    assert!(prob.jacobian(&x, &mut analytic));
                    let mut numeric = Matrix::zeros(r, m);
                    finite_difference_jacobian(&prob, &x, &mut numeric);
                    for (a, n) in analytic.as_slice().iter().zip(numeric.as_slice()) {
                        assert!((a - n).abs() <= 1e-4 * a.abs().max(n.abs()).max(1e-3), "{a} vs {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn coincident_point_has_defined_gradient() {
        let codes = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let prob = AnchorProblem::new(&codes, Anchors::All, &[2.0]);
        let mut j = Matrix::zeros(1, 2);
        prob.jacobian(&[1.0, 1.0], &mut j);
        assert!(j.is_finite());
        assert!(((j[(0, 0)].powi(2) + j[(0, 1)].powi(2)) - 1.0).abs() < 1e-12);
    }
}
