//! Loss heads. Each `*_grad` style function returns the per-example loss and
//! its gradient with respect to the raw network outputs.

use crate::error::{Error, Result};

/// Probabilities are clamped to this floor before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `-ln p[target]` with `p` clamped at [`PROB_FLOOR`].
pub fn cross_entropy(probabilities: &[f64], target: usize) -> Result<f64> {
    let p = probabilities.get(target).ok_or(Error::IndexOutOfRange {
        index: target,
        len: probabilities.len(),
    })?;
    Ok(-p.max(PROB_FLOOR).ln())
}

/// Weighted softmax cross-entropy on logits. Returns `(loss, dloss/dlogits)`;
/// the gradient is `weight * (softmax - onehot)`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize, weight: f64) -> Result<(f64, Vec<f64>)> {
    let probs = softmax(logits);
    let loss = weight * cross_entropy(&probs, target)?;
    let mut grad = probs;
    grad[target] -= 1.0;
    grad.iter_mut().for_each(|g| *g *= weight);
    Ok((loss, grad))
}

/// Squared error on the taken action's Q-value: `(q[action] - target)²`.
pub fn squared_q_error(q: &[f64], action: usize, target: f64) -> Result<(f64, Vec<f64>)> {
    let qa = *q.get(action).ok_or(Error::IndexOutOfRange {
        index: action,
        len: q.len(),
    })?;
    let diff = qa - target;
    let mut grad = vec![0.0; q.len()];
    grad[action] = 2.0 * diff;
    Ok((diff * diff, grad))
}
