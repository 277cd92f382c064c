use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Tensor) -> Result<Tensor> {
    logits.expect_rank(2, "softmax input")?;
    let cols = logits.dim(1);
    let mut out = logits.clone();
    for row in out.data_mut().chunks_mut(cols) {
        softmax_in_place(row);
    }
    Ok(out)
}

pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Sparse categorical cross-entropy averaged over the batch, with its
/// gradient `(softmax - onehot) / batch` with respect to the logits.
pub fn sparse_xent_loss(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    logits.expect_rank(2, "logits")?;
    let (batch, classes) = (logits.dim(0), logits.dim(1));
    if labels.len() != batch {
        return Err(Error::shape(
            "sparse_xent_loss",
            format!("{} labels for batch of {batch}", labels.len()),
        ));
    }
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
        return Err(Error::LabelOutOfRange {
            index,
            label,
            n_classes: classes,
        });
    }
    let mut grad = logits.clone();
    let mut loss = 0.0;
    for (row, &label) in grad.data_mut().chunks_mut(classes).zip(labels) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        loss += log_sum - row[label];
        for v in row.iter_mut() {
            *v = (*v - log_sum).exp() / batch as f64;
        }
        row[label] -= 1.0 / batch as f64;
    }
    Ok((loss / batch as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_log_c() {
        let logits = Tensor::new(vec![2, 4], vec![0.3; 8]).unwrap();
        let (loss, _) = sparse_xent_loss(&logits, &[0, 3]).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_logit_loss() {
        let logits = Tensor::new(vec![1, 3], vec![10.0, 0.0, 0.0]).unwrap();
        let (loss, grad) = sparse_xent_loss(&logits, &[0]).unwrap();
        let direct = -(10f64.exp() / (10f64.exp() + 2.0)).ln();
        assert!((loss - direct).abs() < 1e-15);
        assert!((loss - 9.08e-5).abs() < 1e-7);
        assert!(grad.data().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn gradient_rows_sum_to_zero() {
        let logits = Tensor::new(vec![3, 3], vec![1.0, -2.0, 0.5, 3.0, 3.0, 3.0, -7.0, 0.0, 9.0]).unwrap();
        let (_, grad) = sparse_xent_loss(&logits, &[2, 0, 1]).unwrap();
        for row in grad.data().chunks(3) {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_label_names_index() {
        let logits = Tensor::zeros(&[3, 2]);
        let err = sparse_xent_loss(&logits, &[0, 1, 2]).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { index: 2, label: 2, .. }));
    }

    #[test]
    fn stable_for_huge_logits() {
        let logits = Tensor::new(vec![1, 2], vec![1000.0, -1000.0]).unwrap();
        let (loss, grad) = sparse_xent_loss(&logits, &[1]).unwrap();
        assert!((loss - 2000.0).abs() < 1e-9);
        assert!(grad.all_finite());
    }
}
