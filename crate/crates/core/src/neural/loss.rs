//! Numerically stabilized softmax and cross-entropy loss.

use super::tensor::Scalar;
use super::NeuralError;

/// Softmax with max-subtraction; outputs are strictly positive and sum to 1.
pub fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    let max = logits
        .iter()
        .copied()
        .fold(S::from_f64(f64::NEG_INFINITY), |a, b| a.max(b));
    let exps: Vec<S> = logits.iter().map(|&v| (v - max).exp()).collect();
    let total: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Loss -ln softmax(logits)[label] and its gradient softmax - one_hot over
/// the logits. The log is evaluated through log-sum-exp, so extreme logits do
/// not overflow.
pub fn softmax_cross_entropy<S: Scalar>(
    logits: &[S],
    label: usize,
) -> Result<(S, Vec<S>), NeuralError> {
    let o = logits.len();
    if o < 2 {
        return Err(NeuralError::InvalidParameter(
            "need at least 2 classes".into(),
        ));
    }
    if label >= o {
        return Err(NeuralError::InvalidParameter(format!(
            "label {label} out of range for {o} classes"
        )));
    }
    let max = logits
        .iter()
        .copied()
        .fold(S::from_f64(f64::NEG_INFINITY), |a, b| a.max(b));
    let log_sum_exp = logits
        .iter()
        .map(|&v| (v - max).exp())
        .sum::<S>()
        .ln()
        + max;
    let loss = log_sum_exp - logits[label];
    let mut grad = softmax(logits);
    grad[label] = grad[label] - S::ONE;
    Ok((loss, grad))
}

/// Mean loss over a batch; per-sample gradients are scaled by 1/batch so the
/// sum of per-sample parameter gradients is the gradient of the mean loss.
pub fn softmax_cross_entropy_batch<S: Scalar>(
    logits: &[Vec<S>],
    labels: &[usize],
) -> Result<(S, Vec<Vec<S>>), NeuralError> {
    assert_eq!(logits.len(), labels.len());
    if logits.is_empty() {
        return Err(NeuralError::InvalidParameter("empty batch".into()));
    }
    let inv_b = S::from_f64(1.0 / logits.len() as f64);
    let mut total = S::ZERO;
    let mut grads = Vec::with_capacity(logits.len());
    for (l, &y) in logits.iter().zip(labels) {
        let (loss, mut grad) = softmax_cross_entropy(l, y)?;
        total += loss;
        grad.iter_mut().for_each(|g| *g = *g * inv_b);
        grads.push(grad);
    }
    Ok((total * inv_b, grads))
}
