//! Fully connected layer over flattened features.
//!
//! Features are carried as `(n, f, 1, 1)` tensors and weights as `(out, f, 1, 1)`.

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor4};

/// `y = x·wᵀ + b`.
pub fn linear_forward<T: Real>(x: &Tensor4<T>, w: &Tensor4<T>, b: &[T]) -> Result<Tensor4<T>> {
    let (n, f) = (x.dims().n, x.dims().sample_len());
    let (out, wf) = (w.dims().n, w.dims().sample_len());
    if wf != f {
        return Err(Error::shape(format!("linear: input has {f} features, weight expects {wf}")));
    }
    if b.len() != out {
        return Err(Error::shape(format!("linear: bias has {} entries for {out} outputs", b.len())));
    }
    let mut y = Tensor4::zeros([n, out, 1, 1]);
    for row in y.data_mut().chunks_mut(out.max(1)) {
        row.copy_from_slice(b);
    }
    T::gemm(n, f, out, T::one(), x.data(), f as isize, 1, w.data(), 1, f as isize, T::one(), y.data_mut(), out as isize, 1);
    Ok(y)
}

/// `(grad_x, grad_w, grad_b)` for [`linear_forward`].
pub fn linear_backward<T: Real>(
    grad_out: &Tensor4<T>,
    x: &Tensor4<T>,
    w: &Tensor4<T>,
) -> Result<(Tensor4<T>, Tensor4<T>, Vec<T>)> {
    let (n, f) = (x.dims().n, x.dims().sample_len());
    let out = w.dims().n;
    if w.dims().sample_len() != f || grad_out.dims().n != n || grad_out.dims().sample_len() != out {
        return Err(Error::shape(format!(
            "linear_backward: grad {} / input {} / weight {}",
            grad_out.dims(),
            x.dims(),
            w.dims()
        )));
    }
    let g = grad_out.data();
    let mut gx = Tensor4::zeros(x.dims());
    T::gemm(n, out, f, T::one(), g, out as isize, 1, w.data(), f as isize, 1, T::zero(), gx.data_mut(), f as isize, 1);
    let mut gw = Tensor4::zeros(w.dims());
    T::gemm(out, n, f, T::one(), g, 1, out as isize, x.data(), f as isize, 1, T::zero(), gw.data_mut(), f as isize, 1);
    let mut gb = vec![T::zero(); out];
    for row in g.chunks(out.max(1)) {
        for (acc, &v) in gb.iter_mut().zip(row) {
            *acc += v;
        }
    }
    Ok((gx, gw, gb))
}
