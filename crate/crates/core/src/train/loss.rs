use crate::error::{Error, Result};

/// `mean((p - y)^2)` and its gradient `2 (p - y) / n` per prediction.
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if predictions.is_empty() {
        return Err(Error::Training("loss over an empty batch".into()));
    }
    if predictions.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let n = predictions.len() as f64;
    let loss = predictions.iter().zip(targets).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / n;
    let grad = predictions.iter().zip(targets).map(|(p, y)| 2.0 * (p - y) / n).collect();
    Ok((loss, grad))
}
