use super::ModelError;

/// Max-subtracted log-softmax in f64.
pub fn log_softmax<T: Copy + Into<f64>>(logits: &[T]) -> Vec<f64> {
    let max = logits.iter().map(|&x| x.into()).fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits
        .iter()
        .map(|&x| (x.into() - max).exp())
        .sum::<f64>()
        .ln();
    logits.iter().map(|&x| x.into() - max - log_sum).collect()
}

/// Probabilities summing to 1. Components that would underflow are held
/// at the smallest positive normal so log-probabilities stay finite.
pub fn softmax<T: Copy + Into<f64>>(logits: &[T]) -> Vec<f64> {
    let max = logits.iter().map(|&x| x.into()).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x.into() - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| (e / sum).max(f64::MIN_POSITIVE)).collect()
}

/// `-ln p[label]`.
pub fn cross_entropy(probabilities: &[f64], label: usize) -> Result<f64, ModelError> {
    let p = probabilities.get(label).ok_or(ModelError::Label {
        label,
        num_classes: probabilities.len(),
    })?;
    Ok(-p.ln())
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax<T: Copy + PartialOrd>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
