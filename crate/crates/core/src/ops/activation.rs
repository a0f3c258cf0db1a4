use crate::error::Result;
use crate::tensor::{Real, Tensor4};

pub fn relu_forward<T: Real>(x: &Tensor4<T>) -> Tensor4<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Passes `grad_out` where `x > 0`; the kink at exactly zero gets gradient 0.
pub fn relu_backward<T: Real>(grad_out: &Tensor4<T>, x: &Tensor4<T>) -> Result<Tensor4<T>> {
    grad_out.zip_map(x, |g, v| if v > T::zero() { g } else { T::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_negatives_and_zero() {
        let x = Tensor4::<f32>::from_vec([1, 1, 1, 3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu_forward(&x).data(), &[0.0, 0.0, 2.0]);
        let g = Tensor4::<f32>::full([1, 1, 1, 3], 5.0);
        assert_eq!(relu_backward(&g, &x).unwrap().data(), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn identity_on_positive_input() {
        let x = Tensor4::<f64>::from_fn([2, 2, 2, 2], |n, c, h, w| 0.5 + (n + c + h + w) as f64);
        assert_eq!(relu_forward(&x), x);
        let g = x.map(|v| -v);
        assert_eq!(relu_backward(&g, &x).unwrap(), g);
    }
}
