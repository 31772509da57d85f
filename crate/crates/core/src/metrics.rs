//! Evaluation metrics.

use crate::dataset::Label;

/// Fraction of points with a known class whose prediction matches it.
/// `None` when no point has a known class.
pub fn accuracy(predictions: &[Label], truth: &[Option<Label>]) -> Option<f64> {
    let (hit, total) = predictions
        .iter()
        .zip(truth)
        .filter_map(|(p, t)| t.and_then(|t| t.class()).map(|c| (p.class() == Some(c)) as usize))
        .fold((0, 0), |(h, n), x| (h + x, n + 1));
    (total > 0).then(|| hit as f64 / total as f64)
}

/// Sum of squared errors over points with a known target.
pub fn sse(predictions: &[Label], truth: &[Option<Label>]) -> Option<f64> {
    let mut any = false;
    let mut total = 0.0;
    for (p, t) in predictions.iter().zip(truth) {
        if let (Some(y), Some(yhat)) = (t.and_then(|t| t.value()), p.value()) {
            total += (y - yhat) * (y - yhat);
            any = true;
        }
    }
    any.then_some(total)
}
