use crate::error::{EcgError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxLoss {
    pub probs: Vec<f32>,
    pub loss: f32,
    /// d loss / d logits = probs - onehot(label)
    pub grad: Vec<f32>,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f64> = logits.iter().map(|&z| f64::from(z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| (e / total) as f32).collect()
}

pub fn softmax_cross_entropy(logits: &[f32], label: usize) -> Result<SoftmaxLoss> {
    if label >= logits.len() {
        return Err(EcgError::Data(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let shifted: Vec<f64> = logits.iter().map(|&z| f64::from(z) - f64::from(max)).collect();
    let log_total = shifted.iter().map(|s| s.exp()).sum::<f64>().ln();
    let probs: Vec<f32> = shifted.iter().map(|s| (s - log_total).exp() as f32).collect();
    let loss = (log_total - shifted[label]) as f32;
    let mut grad = probs.clone();
    grad[label] -= 1.0;
    Ok(SoftmaxLoss { probs, loss, grad })
}

/// Index of the largest logit; exact ties go to the lowest index.
pub fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
