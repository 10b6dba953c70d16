use crate::error::{invalid, Result};
use crate::tensor::Tensor;

/// Row-wise softmax of `[batch, classes]` logits, computed in `f64`.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    let (n, c) = logits.dims2()?;
    let mut out = Vec::with_capacity(n * c);
    for row in logits.data().chunks(c) {
        out.extend(softmax_row(row).into_iter().map(|p| p as f32));
    }
    Tensor::new(vec![n, c], out)
}

fn softmax_row(row: &[f32]) -> Vec<f64> {
    let max = row.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b)) as f64;
    let exps: Vec<f64> = row.iter().map(|&v| (v as f64 - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mean cross-entropy of softmax(logits) against class indices, plus its
/// gradient `(softmax - onehot) / batch`.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    let (n, c) = logits.dims2()?;
    if labels.len() != n {
        return Err(invalid!("{} labels for a batch of {n}", labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(invalid!("label {bad} out of range for {c} classes"));
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(n * c);
    for (row, &label) in logits.data().chunks(c).zip(labels) {
        let max = row.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b)) as f64;
        let log_total = row
            .iter()
            .map(|&v| (v as f64 - max).exp())
            .sum::<f64>()
            .ln();
        loss -= row[label] as f64 - max - log_total;
        for (j, &v) in row.iter().enumerate() {
            let p = (v as f64 - max - log_total).exp();
            let target = if j == label { 1.0 } else { 0.0 };
            grad.push(((p - target) / n as f64) as f32);
        }
    }
    Ok((loss / n as f64, Tensor::new(vec![n, c], grad)?))
}
