//! SoftPool: softmax-weighted pooling.
//!
//! For each window `R` the weights are `w_i = exp(a_i) / Σ_{j∈R} exp(a_j)` and the
//! output is `Σ_{j∈R} w_j·a_j`. The exponentials are taken after subtracting the
//! window maximum, which leaves the weights unchanged.
//!
//! The backward pass is the exact derivative of that map:
//! `∂out/∂a_i = w_i·(1 + a_i − out)`. It can be negative, so SoftPool is not
//! monotone in each input.

use crate::error::Result;
use crate::ops::PoolWindow;
use crate::tensor::{Real, Tensor4};

/// Window configuration; the network always uses 2×2 windows with stride 2.
pub type SoftPoolConfig = PoolWindow;

/// Fills `weights` for the window at `(y0, x0)` and returns the pooled value.
#[inline]
fn window<T: Real>(plane: &[T], width: usize, y0: usize, x0: usize, kernel: (usize, usize), weights: &mut [T]) -> T {
    let (kh, kw) = kernel;
    let mut max = T::neg_infinity();
    for i in 0..kh {
        for &v in &plane[(y0 + i) * width + x0..][..kw] {
            max = max.max(v);
        }
    }
    let mut total = T::zero();
    for i in 0..kh {
        for (j, &v) in plane[(y0 + i) * width + x0..][..kw].iter().enumerate() {
            let e = (v - max).exp();
            weights[i * kw + j] = e;
            total += e;
        }
    }
    let mut out = T::zero();
    for i in 0..kh {
        for (j, &v) in plane[(y0 + i) * width + x0..][..kw].iter().enumerate() {
            let w = weights[i * kw + j] / total;
            weights[i * kw + j] = w;
            out += w * v;
        }
    }
    out
}

pub fn softpool_forward<T: Real>(x: &Tensor4<T>, cfg: SoftPoolConfig) -> Result<Tensor4<T>> {
    let d = x.dims();
    let od = cfg.output_dims(d)?;
    x.ensure_finite("softpool input")?;
    let mut y = Tensor4::zeros(od);
    let mut weights = vec![T::zero(); cfg.kernel.0 * cfg.kernel.1];
    let out = y.data_mut();
    let mut o = 0;
    for plane in x.data().chunks(d.plane()) {
        for oy in 0..od.h {
            for ox in 0..od.w {
                out[o] = window(plane, d.w, oy * cfg.stride.0, ox * cfg.stride.1, cfg.kernel, &mut weights);
                o += 1;
            }
        }
    }
    Ok(y)
}

pub fn softpool_backward<T: Real>(grad_out: &Tensor4<T>, x: &Tensor4<T>, cfg: SoftPoolConfig) -> Result<Tensor4<T>> {
    let d = x.dims();
    let od = cfg.output_dims(d)?;
    grad_out.expect_dims(od, "softpool_backward grad_out")?;
    let mut gx = Tensor4::zeros(d);
    let (kh, kw) = cfg.kernel;
    let mut weights = vec![T::zero(); kh * kw];
    let g = grad_out.data();
    let mut o = 0;
    for (plane, gplane) in x.data().chunks(d.plane()).zip(gx.data_mut().chunks_mut(d.plane())) {
        for oy in 0..od.h {
            for ox in 0..od.w {
                let (y0, x0) = (oy * cfg.stride.0, ox * cfg.stride.1);
                let pooled = window(plane, d.w, y0, x0, cfg.kernel, &mut weights);
                for i in 0..kh {
                    let base = (y0 + i) * d.w + x0;
                    for j in 0..kw {
                        let a = plane[base + j];
                        gplane[base + j] += g[o] * weights[i * kw + j] * (T::one() + a - pooled);
                    }
                }
                o += 1;
            }
        }
    }
    gx.ensure_finite("softpool grad_x")?;
    Ok(gx)
}
