use crate::elo::Label;
use crate::error::{Error, Result};

/// F1 score of the positive class, `2TP / (2TP + FP + FN)`.
///
/// When neither prediction nor truth contains a positive the score is 1.
pub fn f1_positive(predicted: &[Label], truth: &[Label]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (p, t) in predicted.iter().zip(truth) {
        match (p.is_positive(), t.is_positive()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * tp as f64 / denom as f64)
}

/// Mean of `predicted - truth` (positive = 1) over items with the feature.
pub fn bias_metric(predicted: &[Label], truth: &[Label], feature_flags: &[bool]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if feature_flags.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: feature_flags.len(),
            right: truth.len(),
        });
    }
    let (sum, count) = predicted
        .iter()
        .zip(truth)
        .zip(feature_flags)
        .filter(|(_, &flag)| flag)
        .fold((0.0, 0usize), |(s, c), ((p, t), _)| {
            (s + p.as_f64() - t.as_f64(), c + 1)
        });
    if count == 0 {
        return Err(Error::NoFeatureItems);
    }
    Ok(sum / count as f64)
}
