//! 2-D cross-correlation via im2col + GEMM.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{Dims, Real, Tensor4};

/// Gradients of [`conv2d_forward`] with respect to its three inputs.
#[derive(Debug, Clone)]
pub struct ConvGrads<T: Real> {
    /// `None` when the caller asked for parameter gradients only.
    pub x: Option<Tensor4<T>>,
    pub w: Tensor4<T>,
    pub b: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    in_c: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: usize,
    oh: usize,
    ow: usize,
}

impl Geometry {
    fn new(x: Dims, k: Dims, stride: usize, pad: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::invalid("conv2d stride must be positive"));
        }
        if k.c != x.c {
            return Err(Error::shape(format!(
                "conv2d channel mismatch: input has {} channels, kernel expects {}",
                x.c, k.c
            )));
        }
        let span_h = x.h + 2 * pad;
        let span_w = x.w + 2 * pad;
        if k.h == 0 || k.w == 0 || span_h < k.h || span_w < k.w {
            return Err(Error::shape(format!(
                "conv2d produces a non-positive output: input {x}, kernel {k}, pad {pad}"
            )));
        }
        Ok(Self {
            in_c: x.c,
            h: x.h,
            w: x.w,
            kh: k.h,
            kw: k.w,
            stride,
            pad,
            oh: (span_h - k.h) / stride + 1,
            ow: (span_w - k.w) / stride + 1,
        })
    }

    fn patch_len(&self) -> usize {
        self.in_c * self.kh * self.kw
    }

    fn out_plane(&self) -> usize {
        self.oh * self.ow
    }

    /// Output range `[lo, hi)` along one axis whose tap `k` lands inside `0..limit`.
    #[inline]
    fn valid_range(&self, k: usize, limit: usize, out_len: usize) -> (usize, usize) {
        let lo = self.pad.saturating_sub(k).div_ceil(self.stride).min(out_len);
        let hi = if limit + self.pad > k { ((limit - 1 + self.pad - k) / self.stride + 1).min(out_len) } else { 0 };
        (lo, hi.max(lo))
    }

    fn im2col<T: Real>(&self, x: &[T], col: &mut [T]) {
        let plane = self.out_plane();
        for ci in 0..self.in_c {
            let chan = &x[ci * self.h * self.w..(ci + 1) * self.h * self.w];
            for ki in 0..self.kh {
                let (y_lo, y_hi) = self.valid_range(ki, self.h, self.oh);
                for kj in 0..self.kw {
                    let (x_lo, x_hi) = self.valid_range(kj, self.w, self.ow);
                    let row = &mut col[((ci * self.kh + ki) * self.kw + kj) * plane..][..plane];
                    row[..y_lo * self.ow].fill(T::zero());
                    row[y_hi * self.ow..].fill(T::zero());
                    for oy in y_lo..y_hi {
                        let iy = oy * self.stride + ki - self.pad;
                        let src = &chan[iy * self.w..(iy + 1) * self.w];
                        let dst = &mut row[oy * self.ow..(oy + 1) * self.ow];
                        dst[..x_lo].fill(T::zero());
                        dst[x_hi..].fill(T::zero());
                        if x_lo == x_hi {
                            continue;
                        }
                        let ix0 = x_lo * self.stride + kj - self.pad;
                        if self.stride == 1 {
                            dst[x_lo..x_hi].copy_from_slice(&src[ix0..ix0 + (x_hi - x_lo)]);
                        } else {
                            for (d, ix) in dst[x_lo..x_hi].iter_mut().zip((ix0..).step_by(self.stride)) {
                                *d = src[ix];
                            }
                        }
                    }
                }
            }
        }
    }

    fn col2im<T: Real>(&self, col: &[T], gx: &mut [T]) {
        let plane = self.out_plane();
        for ci in 0..self.in_c {
            let chan = &mut gx[ci * self.h * self.w..(ci + 1) * self.h * self.w];
            for ki in 0..self.kh {
                let (y_lo, y_hi) = self.valid_range(ki, self.h, self.oh);
                for kj in 0..self.kw {
                    let (x_lo, x_hi) = self.valid_range(kj, self.w, self.ow);
                    if x_lo == x_hi {
                        continue;
                    }
                    let row = &col[((ci * self.kh + ki) * self.kw + kj) * plane..][..plane];
                    for oy in y_lo..y_hi {
                        let iy = oy * self.stride + ki - self.pad;
                        let dst = &mut chan[iy * self.w..(iy + 1) * self.w];
                        let src = &row[oy * self.ow + x_lo..oy * self.ow + x_hi];
                        let ix0 = x_lo * self.stride + kj - self.pad;
                        for (&g, ix) in src.iter().zip((ix0..).step_by(self.stride)) {
                            dst[ix] += g;
                        }
                    }
                }
            }
        }
    }
}

/// Output spatial size of a convolution along one axis.
pub fn conv_output_len(input: usize, kernel: usize, stride: usize, pad: usize) -> Option<usize> {
    let span = input + 2 * pad;
    (stride > 0 && kernel > 0 && span >= kernel).then(|| (span - kernel) / stride + 1)
}

/// Cross-correlation of `x` (n, in_c, h, w) with `w` (out_c, in_c, kh, kw) plus per-channel bias.
pub fn conv2d_forward<T: Real>(
    x: &Tensor4<T>,
    w: &Tensor4<T>,
    b: &[T],
    stride: usize,
    pad: usize,
) -> Result<Tensor4<T>> {
    let geo = Geometry::new(x.dims(), w.dims(), stride, pad)?;
    let out_c = w.dims().n;
    if b.len() != out_c {
        return Err(Error::shape(format!("conv2d bias has {} entries for {out_c} filters", b.len())));
    }
    let (k, p) = (geo.patch_len(), geo.out_plane());
    let mut out = Tensor4::zeros([x.dims().n, out_c, geo.oh, geo.ow]);
    if out.is_empty() {
        return Ok(out);
    }
    out.data_mut()
        .par_chunks_mut(out_c * p)
        .zip(x.data().par_chunks(x.dims().sample_len()))
        .for_each(|(y, xs)| {
            let mut col = vec![T::zero(); k * p];
            geo.im2col(xs, &mut col);
            for (row, &bias) in y.chunks_mut(p).zip(b) {
                row.fill(bias);
            }
            T::gemm(out_c, k, p, T::one(), w.data(), k as isize, 1, &col, p as isize, 1, T::one(), y, p as isize, 1);
        });
    Ok(out)
}

/// Exact gradients of [`conv2d_forward`]: `(grad_x, grad_w, grad_b)`.
pub fn conv2d_backward<T: Real>(
    grad_out: &Tensor4<T>,
    x: &Tensor4<T>,
    w: &Tensor4<T>,
    stride: usize,
    pad: usize,
) -> Result<(Tensor4<T>, Tensor4<T>, Vec<T>)> {
    let g = conv2d_backward_with(grad_out, x, w, stride, pad, true)?;
    Ok((g.x.expect("input gradient requested"), g.w, g.b))
}

/// Like [`conv2d_backward`], skipping the input gradient unless `want_input_grad`.
pub fn conv2d_backward_with<T: Real>(
    grad_out: &Tensor4<T>,
    x: &Tensor4<T>,
    w: &Tensor4<T>,
    stride: usize,
    pad: usize,
    want_input_grad: bool,
) -> Result<ConvGrads<T>> {
    let geo = Geometry::new(x.dims(), w.dims(), stride, pad)?;
    let out_c = w.dims().n;
    grad_out.expect_dims(Dims::new(x.dims().n, out_c, geo.oh, geo.ow), "conv2d_backward grad_out")?;
    let (k, p) = (geo.patch_len(), geo.out_plane());

    let per_sample: Vec<(Vec<T>, Option<Vec<T>>)> = grad_out
        .data()
        .par_chunks(out_c * p.max(1))
        .zip(x.data().par_chunks(x.dims().sample_len().max(1)))
        .map(|(gy, xs)| {
            let mut col = vec![T::zero(); k * p];
            geo.im2col(xs, &mut col);
            let mut gw = vec![T::zero(); out_c * k];
            // gw = gy (out_c × p) · colᵀ (p × k)
            T::gemm(out_c, p, k, T::one(), gy, p as isize, 1, &col, 1, p as isize, T::zero(), &mut gw, k as isize, 1);
            let gx = want_input_grad.then(|| {
                // gcol = wᵀ (k × out_c) · gy (out_c × p), reusing the col buffer
                T::gemm(k, out_c, p, T::one(), w.data(), 1, k as isize, gy, p as isize, 1, T::zero(), &mut col, p as isize, 1);
                let mut gx = vec![T::zero(); xs.len()];
                geo.col2im(&col, &mut gx);
                gx
            });
            (gw, gx)
        })
        .collect();

    // Reduce in sample order so the result does not depend on scheduling.
    let mut gw = Tensor4::zeros(w.dims());
    let mut gx_data = want_input_grad.then(|| Vec::with_capacity(x.len()));
    for (sw, sx) in per_sample {
        for (a, b) in gw.data_mut().iter_mut().zip(sw) {
            *a += b;
        }
        if let (Some(buf), Some(sx)) = (gx_data.as_mut(), sx) {
            buf.extend(sx);
        }
    }
    let mut gb = vec![T::zero(); out_c];
    for gy in grad_out.data().chunks(out_c * p.max(1)) {
        for (acc, row) in gb.iter_mut().zip(gy.chunks(p.max(1))) {
            *acc += row.iter().fold(T::zero(), |s, &v| s + v);
        }
    }
    let gx = match gx_data {
        Some(data) if data.is_empty() => Some(Tensor4::zeros(x.dims())),
        Some(data) => Some(Tensor4::from_vec(x.dims(), data)?),
        None => None,
    };
    Ok(ConvGrads { x: gx, w: gw, b: gb })
}
