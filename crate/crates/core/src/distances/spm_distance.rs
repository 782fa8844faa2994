use crate::error::{Error, Result};

/// Slack allowed on similarities computed in floating point.
const RANGE_SLACK: f64 = 1e-12;

fn check_similarity(k: f64) -> Result<f64> {
    if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&k) {
        return Err(Error::Range(format!("similarity {k} is outside [0, 1]")));
    }
    Ok(k.clamp(0.0, 1.0))
}

/// `1 - K`.
pub fn spm1_distance(similarity: f64) -> Result<f64> {
    Ok(1.0 - check_similarity(similarity)?)
}

/// `-ln((1 - ε) K + ε)`, which lies in `[0, -ln ε]`.
pub fn spm2_distance(similarity: f64, epsilon: f64) -> Result<f64> {
    let k = check_similarity(similarity)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Range(format!("epsilon {epsilon} is outside (0, 1)")));
    }
    Ok(-((1.0 - epsilon) * k + epsilon).ln().min(0.0))
}
