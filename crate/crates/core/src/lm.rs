//! Levenberg-Marquardt minimization of a sum of squared residuals.
//!
//! Damping follows the classic multiplicative Marquardt schedule: the damped
//! normal equations `(JᵀJ + λ diag(JᵀJ)) δ = -Jᵀr` are solved by Cholesky,
//! λ is divided by `damping_down` after an accepted step and multiplied by
//! `damping_up` after a rejected one (or a failed factorization).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, norm, Matrix};

/// A residual map `R^p -> R^r` with an optional analytic Jacobian.
pub trait LeastSquaresProblem {
    fn num_params(&self) -> usize;

    fn num_residuals(&self) -> usize;

    fn residuals(&self, x: &[f64], out: &mut [f64]);

    /// Fills the `r x p` Jacobian. Returning `false` selects the central
    /// finite-difference fallback.
    fn jacobian(&self, _x: &[f64], _out: &mut Matrix) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub max_iterations: usize,
    /// Bound on `‖Jᵀr‖_∞`.
    pub gradient_tolerance: f64,
    /// Bound on `‖δ‖ / (‖x‖ + step_tolerance)`.
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 10.0,
            max_iterations: 100,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-10,
        }
    }
}

impl LmOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping_up > 1.0 && self.damping_down > 1.0) {
            return Err(Error::InvalidArgument(
                "damping factors must exceed 1".into(),
            ));
        }
        if !(self.gradient_tolerance > 0.0 && self.step_tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.initial_damping > 0.0) {
            return Err(Error::InvalidArgument(
                "initial damping must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Gradient,
    Step,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub solution: Vec<f64>,
    /// Sum of squared residuals at `solution`.
    pub final_cost: f64,
    pub initial_cost: f64,
    /// Number of damped linear solves attempted.
    pub iterations: usize,
    pub termination: Termination,
    /// Cost at the start and after every accepted step.
    pub accepted_costs: Vec<f64>,
}

const FD_STEP: f64 = 1e-6;

pub fn lm_minimize<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    opts: &LmOptions,
) -> Result<LmResult> {
    opts.validate()?;
    let p = problem.num_params();
    let r_len = problem.num_residuals();
    if x0.len() != p {
        return Err(Error::Dimension(format!(
            "initial point has length {}, problem expects {p}",
            x0.len()
        )));
    }

    let mut x = x0.to_vec();
    let mut r = vec![0.0; r_len];
    problem.residuals(&x, &mut r);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: "residuals are not finite at the initial point".into(),
            last_iterate: None,
        });
    }
    let mut cost = sum_sq(&r);
    let initial_cost = cost;
    let mut accepted_costs = vec![cost];

    let mut lambda = opts.initial_damping;
    let mut iterations = 0;
    let mut jac = Matrix::zeros(r_len, p);
    let mut trial = vec![0.0; p];
    let mut r_trial = vec![0.0; r_len];

    let finish = |x: Vec<f64>, cost, iterations, termination, accepted_costs| LmResult {
        solution: x,
        final_cost: cost,
        initial_cost,
        iterations,
        termination,
        accepted_costs,
    };

    loop {
        if !problem.jacobian(&x, &mut jac) {
            finite_difference_jacobian(problem, &x, &mut jac);
        }
        if !jac.is_finite() {
            return Err(Error::Numerical {
                message: "Jacobian is not finite".into(),
                last_iterate: Some(x),
            });
        }

        // Normal equations.
        let mut h = Matrix::zeros(p, p);
        let mut g = vec![0.0; p];
        for (k, row) in jac.iter_rows().enumerate() {
            let rk = r[k];
            for a in 0..p {
                let ja = row[a];
                if ja == 0.0 {
                    continue;
                }
                g[a] += ja * rk;
                for b in a..p {
                    h[(a, b)] += ja * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= opts.gradient_tolerance {
            return Ok(finish(x, cost, iterations, Termination::Gradient, accepted_costs));
        }
        let max_diag = (0..p).fold(0.0f64, |m, a| m.max(h[(a, a)]));
        let diag_floor = (max_diag * 1e-12).max(f64::MIN_POSITIVE);

        loop {
            if iterations >= opts.max_iterations {
                return Ok(finish(x, cost, iterations, Termination::MaxIter, accepted_costs));
            }
            iterations += 1;

            let mut damped = h.clone();
            for a in 0..p {
                damped[(a, a)] += lambda * h[(a, a)].max(diag_floor);
            }
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(delta) = cholesky_solve(&damped, &neg_g) else {
                lambda *= opts.damping_up;
                continue;
            };
            if norm(&delta) <= opts.step_tolerance * (norm(&x) + opts.step_tolerance) {
                return Ok(finish(x, cost, iterations, Termination::Step, accepted_costs));
            }
            for ((t, xi), di) in trial.iter_mut().zip(&x).zip(&delta) {
                *t = xi + di;
            }
            problem.residuals(&trial, &mut r_trial);
            if r_trial.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical {
                    message: "residuals became non-finite during the search".into(),
                    last_iterate: Some(x),
                });
            }
            let trial_cost = sum_sq(&r_trial);
            if trial_cost < cost {
                std::mem::swap(&mut x, &mut trial);
                std::mem::swap(&mut r, &mut r_trial);
                cost = trial_cost;
                accepted_costs.push(cost);
                lambda = (lambda / opts.damping_down).max(1e-300);
                break;
            }
            lambda *= opts.damping_up;
        }
    }
}

/// Central differences with step `1e-6 * max(1, |x_i|)`.
pub fn finite_difference_jacobian<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    out: &mut Matrix,
) {
    let r_len = problem.num_residuals();
    let mut xp = x.to_vec();
    let mut plus = vec![0.0; r_len];
    let mut minus = vec![0.0; r_len];
    for a in 0..x.len() {
        let h = FD_STEP * x[a].abs().max(1.0);
        xp[a] = x[a] + h;
        problem.residuals(&xp, &mut plus);
        xp[a] = x[a] - h;
        problem.residuals(&xp, &mut minus);
        xp[a] = x[a];
        for k in 0..r_len {
            out[(k, a)] = (plus[k] - minus[k]) / (2.0 * h);
        }
    }
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Shift;

    impl LeastSquaresProblem for Shift {
        fn num_params(&self) -> usize {
            1
        }
        fn num_residuals(&self) -> usize {
            1
        }
        fn residuals(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0] - 3.0;
        }
    }

    /// Distances from `x` to fixed anchors minus target distances.
    struct Trilateration {
        anchors: Vec<[f64; 2]>,
        targets: Vec<f64>,
    }

    impl LeastSquaresProblem for Trilateration {
        fn num_params(&self) -> usize {
            2
        }
        fn num_residuals(&self) -> usize {
            self.anchors.len()
        }
        fn residuals(&self, x: &[f64], out: &mut [f64]) {
            for (k, a) in self.anchors.iter().enumerate() {
                out[k] = ((x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2)).sqrt() - self.targets[k];
            }
        }
    }

    /// `r = A x - b`.
    struct Linear {
        a: Matrix,
        b: Vec<f64>,
    }

    impl LeastSquaresProblem for Linear {
        fn num_params(&self) -> usize {
            self.a.cols()
        }
        fn num_residuals(&self) -> usize {
            self.a.rows()
        }
        fn residuals(&self, x: &[f64], out: &mut [f64]) {
            for (k, row) in self.a.iter_rows().enumerate() {
                out[k] = crate::linalg::dot(row, x) - self.b[k];
            }
        }
        fn jacobian(&self, _x: &[f64], out: &mut Matrix) -> bool {
            out.as_mut_slice().copy_from_slice(self.a.as_slice());
            true
        }
    }

    struct Exploding;

    impl LeastSquaresProblem for Exploding {
        fn num_params(&self) -> usize {
            1
        }
        fn num_residuals(&self) -> usize {
            1
        }
        fn residuals(&self, x: &[f64], out: &mut [f64]) {
            out[0] = if x[0] > 0.5 { f64::NAN } else { x[0] - 10.0 };
        }
        fn jacobian(&self, _x: &[f64], out: &mut Matrix) -> bool {
            out[(0, 0)] = 1.0;
            true
        }
    }

    #[test]
    fn linear_residual_reaches_root() {
        let res = lm_minimize(&Shift, &[0.0], &LmOptions::default()).unwrap();
        assert!((res.solution[0] - 3.0).abs() < 1e-9);
        assert!(res.final_cost < 1e-18);
    }

    #[test]
    fn symmetric_two_anchor_placement() {
        let prob = Trilateration {
            anchors: vec![[0.0, 0.0], [2.0, 0.0]],
            targets: vec![1.0, 1.0],
        };
        let res = lm_minimize(&prob, &[0.5, 0.3], &LmOptions::default()).unwrap();
        // The Jacobian is rank one at the root, so convergence in y is only
        // linear and the gradient test fires while y is still ~1e-3.
        assert!((res.solution[0] - 1.0).abs() < 1e-6, "{:?}", res.solution);
        assert!(res.solution[1].abs() < 1e-3, "{:?}", res.solution);
        assert!(res.final_cost < 1e-12);
    }

    #[test]
    fn exact_trilateration() {
        let anchors = vec![[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]];
        let truth = [1.0, 1.0];
        let targets = anchors
            .iter()
            .map(|a: &[f64; 2]| ((truth[0] - a[0]).powi(2) + (truth[1] - a[1]).powi(2)).sqrt())
            .collect();
        let prob = Trilateration { anchors, targets };
        let res = lm_minimize(&prob, &[0.2, 0.1], &LmOptions::default()).unwrap();
        assert!((res.solution[0] - 1.0).abs() < 1e-6 && (res.solution[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_problems_converge_fast() {
        let a = Matrix::from_rows(&[
            vec![1.0, 2.0, 0.5],
            vec![0.0, 1.0, -1.0],
            vec![3.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        let b = vec![1.0, -2.0, 0.5, 4.0];
        // Normal-equations solution as the reference.
        let ata = a.transpose().matmul(&a).unwrap();
        let atb = a.transpose().matvec(&b).unwrap();
        let exact = cholesky_solve(&ata, &atb).unwrap();
        let prob = Linear { a, b };
        let mut accepted = 0;
        let res = lm_minimize(&prob, &[0.0; 3], &LmOptions::default()).unwrap();
        accepted += res.accepted_costs.len() - 1;
        for (s, e) in res.solution.iter().zip(&exact) {
            assert!((s - e).abs() < 1e-8);
        }
        assert!(accepted <= 5, "took {accepted} steps");
    }

    #[test]
    fn accepted_costs_are_monotone() {
        let prob = Trilateration {
            anchors: vec![[0.0, 0.0], [4.0, 0.0], [0.0, 3.0], [5.0, 5.0]],
            targets: vec![2.0, 3.0, 2.5, 4.0],
        };
        let res = lm_minimize(&prob, &[10.0, -7.0], &LmOptions::default()).unwrap();
        assert!(res.accepted_costs.windows(2).all(|w| w[1] <= w[0]));
        assert!(res.final_cost <= res.initial_cost);
    }

    #[test]
    fn non_finite_residual_reports_last_iterate() {
        let err = lm_minimize(&Exploding, &[0.0], &LmOptions::default()).unwrap_err();
        match err {
            Error::Numerical { last_iterate, .. } => assert_eq!(last_iterate, Some(vec![0.0])),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_options_and_shapes() {
        let opts = LmOptions {
            damping_up: 1.0,
            ..LmOptions::default()
        };
        assert!(lm_minimize(&Shift, &[0.0], &opts).is_err());
        assert!(matches!(
            lm_minimize(&Shift, &[0.0, 1.0], &LmOptions::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn max_iterations_returns_best_point() {
        let opts = LmOptions {
            max_iterations: 1,
            ..LmOptions::default()
        };
        let prob = Trilateration {
            anchors: vec![[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]],
            targets: vec![2.0, 3.0, 2.5],
        };
        let res = lm_minimize(&prob, &[10.0, -7.0], &opts).unwrap();
        assert_eq!(res.termination, Termination::MaxIter);
        assert!(res.final_cost <= res.initial_cost);
    }
}
