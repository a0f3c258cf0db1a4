use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor4};

/// Row-wise softmax of `(n, k, 1, 1)` logits, stabilized by the row maximum.
pub fn softmax<T: Real>(logits: &Tensor4<T>) -> Tensor4<T> {
    let k = logits.dims().sample_len().max(1);
    let mut out = logits.clone();
    for row in out.data_mut().chunks_mut(k) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Mean negative log-likelihood over the batch and its gradient `(softmax − onehot)/n`.
///
/// Labels follow the fixed convention 0 = cg, 1 = pg.
pub fn softmax_cross_entropy<T: Real>(logits: &Tensor4<T>, labels: &[usize]) -> Result<(T, Tensor4<T>)> {
    let n = logits.dims().n;
    let k = logits.dims().sample_len();
    if labels.len() != n {
        return Err(Error::shape(format!("{} labels for {n} logit rows", labels.len())));
    }
    if n == 0 {
        return Err(Error::invalid("cross entropy of an empty batch"));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::LabelOutOfRange(bad));
    }
    let inv_n = T::one() / T::from_usize(n).expect("batch fits");
    let mut grad = Tensor4::zeros(logits.dims());
    let mut loss = T::zero();
    for ((row, g), &label) in logits.data().chunks(k).zip(grad.data_mut().chunks_mut(k)).zip(labels) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let lse = max + row.iter().fold(T::zero(), |s, &v| s + (v - max).exp()).ln();
        loss += lse - row[label];
        for (j, (gj, &v)) in g.iter_mut().zip(row).enumerate() {
            let p = (v - lse).exp();
            *gj = (p - if j == label { T::one() } else { T::zero() }) * inv_n;
        }
    }
    let loss = loss * inv_n;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("cross entropy loss is {loss}")));
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logits(rows: &[[f64; 2]]) -> Tensor4<f64> {
        Tensor4::from_vec([rows.len(), 2, 1, 1], rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn uniform_logits_cost_ln2() {
        for label in [0, 1] {
            let (loss, _) = softmax_cross_entropy(&logits(&[[0.0, 0.0]]), &[label]).unwrap();
            assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let (loss, grad) = softmax_cross_entropy(&logits(&[[30.0, -30.0]]), &[0]).unwrap();
        assert!(loss.abs() < 1e-20);
        assert!(grad.is_finite());
        let (loss, _) = softmax_cross_entropy(&logits(&[[1000.0, -1000.0]]), &[1]).unwrap();
        assert!((loss - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn label_must_be_cg_or_pg() {
        assert!(matches!(
            softmax_cross_entropy(&logits(&[[0.0, 0.0]]), &[2]),
            Err(Error::LabelOutOfRange(2))
        ));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let p = softmax(&logits(&[[3.0, -1.0], [0.0, 700.0]]));
        for row in p.data().chunks(2) {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-12);
        }
    }
}
