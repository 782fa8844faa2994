use crate::error::{Error, Result};
use crate::lm::{lm_minimize, LmOptions};

use super::subproblem::{AnchorProblem, Anchors};
use super::Embedding;

/// Out-of-sample code for an item given its distances to every training item.
///
/// Minimizes `Σ_i (‖x - x_i‖ - dists_i)²` starting from the code of the
/// training item with the smallest distance.
pub fn encode_new(train: &Embedding, dists: &[f64], lm: &LmOptions) -> Result<Vec<f64>> {
    let n = train.len();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot encode against an empty embedding".into()));
    }
    if dists.len() != n {
        return Err(Error::Dimension(format!(
            "got {} distances for {n} training items",
            dists.len()
        )));
    }
    if let Some((i, v)) = dists.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::Range(format!("distance {i} is {v}")));
    }
    let nearest = dists
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("non-empty");
    let start = train.codes.row(nearest).to_vec();
    let prob = AnchorProblem::new(&train.codes, Anchors::All, dists);
    Ok(lm_minimize(&prob, &start, lm)?.solution)
}

/// `Σ_i (‖code - x_i‖ - dists_i)²`.
pub fn encoding_objective(train: &Embedding, code: &[f64], dists: &[f64]) -> f64 {
    AnchorProblem::new(&train.codes, Anchors::All, dists).cost(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{euclidean, Matrix};

    #[test]
    fn single_anchor() {
        let train = Embedding::from_codes(Matrix::from_rows(&[vec![2.0]]).unwrap());
        let code = encode_new(&train, &[5.0], &LmOptions::default()).unwrap();
        assert!(((code[0] - 2.0).abs() - 5.0).abs() < 1e-9);
        assert!(encoding_objective(&train, &code, &[5.0]) < 1e-18);
    }

    #[test]
    fn recovers_triangle_centroid() {
        let h = 3f64.sqrt() / 2.0;
        let codes = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        let centroid = [0.5, h / 3.0];
        let dists: Vec<f64> = codes.iter_rows().map(|r| euclidean(r, &centroid)).collect();
        let train = Embedding::from_codes(codes);
        let code = encode_new(&train, &dists, &LmOptions::default()).unwrap();
        assert!((code[0] - centroid[0]).abs() < 1e-6 && (code[1] - centroid[1]).abs() < 1e-6, "{code:?}");
    }

    #[test]
    fn never_worse_than_nearest_training_code() {
        let codes = Matrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 1.0], vec![-1.0, 4.0], vec![2.0, 2.0]]).unwrap();
        let train = Embedding::from_codes(codes.clone());
        for k in 0..4 {
            let dists: Vec<f64> = codes.iter_rows().map(|r| euclidean(r, codes.row(k)) * 1.1).collect();
            let code = encode_new(&train, &dists, &LmOptions::default()).unwrap();
            assert!(encoding_objective(&train, &code, &dists) <= encoding_objective(&train, codes.row(k), &dists));
        }
    }

    #[test]
    fn input_errors() {
        let train = Embedding::from_codes(Matrix::zeros(0, 2));
        assert!(matches!(encode_new(&train, &[], &LmOptions::default()), Err(Error::InvalidArgument(_))));
        let train = Embedding::from_codes(Matrix::zeros(2, 2));
        assert!(encode_new(&train, &[1.0], &LmOptions::default()).is_err());
        assert!(encode_new(&train, &[1.0, -1.0], &LmOptions::default()).is_err());
    }
}
