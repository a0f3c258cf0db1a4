//! Global average pooling and max pooling.

use crate::error::{Error, Result};
use crate::tensor::{Dims, Real, Tensor4};

/// Per-channel spatial mean: `(n, c, h, w) -> (n, c, 1, 1)`.
pub fn global_avg_pool_forward<T: Real>(x: &Tensor4<T>) -> Result<Tensor4<T>> {
    let d = x.dims();
    if d.plane() == 0 {
        return Err(Error::shape("global_avg_pool on an empty plane"));
    }
    let inv = T::one() / T::from_usize(d.plane()).expect("plane fits");
    let data = x
        .data()
        .chunks(d.plane())
        .map(|p| p.iter().fold(T::zero(), |s, &v| s + v) * inv)
        .collect();
    Tensor4::from_vec([d.n, d.c, 1, 1], data)
}

/// Spreads each channel's gradient evenly over its `h·w` inputs.
pub fn global_avg_pool_backward<T: Real>(grad_out: &Tensor4<T>, input_dims: Dims) -> Result<Tensor4<T>> {
    grad_out.expect_dims(Dims::new(input_dims.n, input_dims.c, 1, 1), "global_avg_pool_backward")?;
    let plane = input_dims.plane();
    let inv = T::one() / T::from_usize(plane).expect("plane fits");
    let mut data = Vec::with_capacity(input_dims.len());
    for &g in grad_out.data() {
        data.extend(std::iter::repeat(g * inv).take(plane));
    }
    Tensor4::from_vec(input_dims, data)
}

/// Window geometry shared by max pooling and SoftPool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PoolWindow {
    pub kernel: (usize, usize),
    pub stride: (usize, usize),
}

impl Default for PoolWindow {
    fn default() -> Self {
        Self { kernel: (2, 2), stride: (2, 2) }
    }
}

impl PoolWindow {
    /// Output dims; errors unless the windows tile the input exactly along each axis.
    pub fn output_dims(&self, d: Dims) -> Result<Dims> {
        let axis = |len: usize, k: usize, s: usize, name: &str| -> Result<usize> {
            if k == 0 || s == 0 {
                return Err(Error::invalid(format!("pool window {self:?} has a zero extent")));
            }
            if len < k || (len - k) % s != 0 {
                return Err(Error::shape(format!(
                    "pool {name} {len} is not covered exactly by kernel {k} / stride {s}"
                )));
            }
            Ok((len - k) / s + 1)
        };
        let oh = axis(d.h, self.kernel.0, self.stride.0, "height")?;
        let ow = axis(d.w, self.kernel.1, self.stride.1, "width")?;
        Ok(Dims::new(d.n, d.c, oh, ow))
    }

    /// Flat plane offsets of the inputs feeding output `(oy, ox)`.
    pub(crate) fn taps(&self, width: usize, oy: usize, ox: usize) -> impl Iterator<Item = usize> + '_ {
        let (y0, x0) = (oy * self.stride.0, ox * self.stride.1);
        (0..self.kernel.0).flat_map(move |i| (0..self.kernel.1).map(move |j| (y0 + i) * width + x0 + j))
    }
}

/// Max pooling; returns the output and the flat argmax index of each output.
pub fn maxpool_forward<T: Real>(x: &Tensor4<T>, win: PoolWindow) -> Result<(Tensor4<T>, Vec<usize>)> {
    let d = x.dims();
    let od = win.output_dims(d)?;
    let mut y = Tensor4::zeros(od);
    let mut arg = Vec::with_capacity(od.len());
    let mut o = 0;
    for plane_idx in 0..d.n * d.c {
        let base = plane_idx * d.plane();
        let plane = &x.data()[base..base + d.plane()];
        for oy in 0..od.h {
            for ox in 0..od.w {
                // first maximum wins on ties
                let best = win
                    .taps(d.w, oy, ox)
                    .reduce(|a, b| if plane[b] > plane[a] { b } else { a })
                    .expect("window is non-empty");
                y.data_mut()[o] = plane[best];
                arg.push(base + best);
                o += 1;
            }
        }
    }
    Ok((y, arg))
}

pub fn maxpool_backward<T: Real>(grad_out: &Tensor4<T>, argmax: &[usize], input_dims: Dims) -> Result<Tensor4<T>> {
    if grad_out.len() != argmax.len() {
        return Err(Error::shape("maxpool_backward: gradient does not match cached argmax"));
    }
    let mut gx = Tensor4::zeros(input_dims);
    for (&g, &i) in grad_out.data().iter().zip(argmax) {
        gx.data_mut()[i] += g;
    }
    Ok(gx)
}
