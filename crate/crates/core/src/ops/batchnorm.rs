//! Per-channel batch normalization over (n, h, w).

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor4};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Exponential moving averages of per-channel mean and (unbiased) variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats<T> {
    pub mean: Vec<T>,
    pub var: Vec<T>,
}

impl<T: Real> RunningStats<T> {
    /// Mean 0, variance 1 for `channels` channels.
    pub fn new(channels: usize) -> Self {
        Self { mean: vec![T::zero(); channels], var: vec![T::one(); channels] }
    }

    /// No statistics yet; eval mode refuses to run on these.
    pub fn uninitialized() -> Self {
        Self { mean: Vec::new(), var: Vec::new() }
    }

    pub fn is_initialized_for(&self, channels: usize) -> bool {
        self.mean.len() == channels && self.var.len() == channels
    }
}

/// Intermediates kept from a train-mode forward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache<T: Real> {
    pub x_hat: Tensor4<T>,
    pub inv_std: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct BatchNormOptions {
    pub momentum: f64,
    pub eps: f64,
}

impl Default for BatchNormOptions {
    fn default() -> Self {
        Self { momentum: BN_MOMENTUM, eps: BN_EPS }
    }
}

/// Normalizes each channel; in train mode also updates `running` and returns a cache.
pub fn batchnorm2d_forward<T: Real>(
    x: &Tensor4<T>,
    gamma: &[T],
    beta: &[T],
    running: &mut RunningStats<T>,
    mode: Mode,
    opts: BatchNormOptions,
) -> Result<(Tensor4<T>, Option<BatchNormCache<T>>)> {
    let d = x.dims();
    if gamma.len() != d.c || beta.len() != d.c {
        return Err(Error::shape(format!(
            "batchnorm: {} channels but gamma/beta have {}/{}",
            d.c,
            gamma.len(),
            beta.len()
        )));
    }
    let m = d.n * d.plane();
    let plane = d.plane();
    let eps = T::from_f64_lossy(opts.eps);

    let (mean, var) = match mode {
        Mode::Eval => {
            if !running.is_initialized_for(d.c) {
                return Err(Error::UninitializedRunningStats);
            }
            (running.mean.clone(), running.var.clone())
        }
        Mode::Train => {
            if m < 2 {
                return Err(Error::shape(format!("batchnorm train mode needs n·h·w ≥ 2, got {m}")));
            }
            let mut mean = vec![T::zero(); d.c];
            let mut var = vec![T::zero(); d.c];
            for c in 0..d.c {
                let mut sum = 0.0f64;
                for n in 0..d.n {
                    sum += x.sample(n)[c * plane..(c + 1) * plane].iter().map(|v| v.to_f64_lossy()).sum::<f64>();
                }
                let mu = sum / m as f64;
                let mut sq = 0.0f64;
                for n in 0..d.n {
                    sq += x.sample(n)[c * plane..(c + 1) * plane]
                        .iter()
                        .map(|v| (v.to_f64_lossy() - mu).powi(2))
                        .sum::<f64>();
                }
                mean[c] = T::from_f64_lossy(mu);
                var[c] = T::from_f64_lossy(sq / m as f64);
            }
            if !running.is_initialized_for(d.c) {
                *running = RunningStats::new(d.c);
            }
            let mom = T::from_f64_lossy(opts.momentum);
            let unbias = T::from_f64_lossy(m as f64 / (m - 1) as f64);
            for c in 0..d.c {
                running.mean[c] = (T::one() - mom) * running.mean[c] + mom * mean[c];
                running.var[c] = (T::one() - mom) * running.var[c] + mom * var[c] * unbias;
            }
            (mean, var)
        }
    };

    let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps).sqrt()).collect();
    let mut x_hat = Tensor4::zeros(d);
    let mut y = Tensor4::zeros(d);
    for n in 0..d.n {
        let xs = x.sample(n);
        let hs = x_hat.sample_mut(n);
        for c in 0..d.c {
            for i in c * plane..(c + 1) * plane {
                hs[i] = (xs[i] - mean[c]) * inv_std[c];
            }
        }
        let ys = y.sample_mut(n);
        for c in 0..d.c {
            for i in c * plane..(c + 1) * plane {
                ys[i] = gamma[c] * x_hat.sample(n)[i] + beta[c];
            }
        }
    }
    y.ensure_finite("batchnorm output")?;
    let cache = (mode == Mode::Train).then_some(BatchNormCache { x_hat, inv_std });
    Ok((y, cache))
}

/// Exact gradients through the batch statistics: `(grad_x, grad_gamma, grad_beta)`.
pub fn batchnorm2d_backward<T: Real>(
    grad_out: &Tensor4<T>,
    gamma: &[T],
    cache: Option<&BatchNormCache<T>>,
) -> Result<(Tensor4<T>, Vec<T>, Vec<T>)> {
    let cache = cache.ok_or(Error::MissingCache("batchnorm"))?;
    let d = cache.x_hat.dims();
    grad_out.expect_dims(d, "batchnorm_backward grad_out")?;
    let plane = d.plane();
    let m = T::from_usize(d.n * plane).expect("count fits");

    let mut g_gamma = vec![T::zero(); d.c];
    let mut g_beta = vec![T::zero(); d.c];
    for n in 0..d.n {
        let g = grad_out.sample(n);
        let h = cache.x_hat.sample(n);
        for c in 0..d.c {
            for i in c * plane..(c + 1) * plane {
                g_beta[c] += g[i];
                g_gamma[c] += g[i] * h[i];
            }
        }
    }

    let mut gx = Tensor4::zeros(d);
    for n in 0..d.n {
        let g = grad_out.sample(n);
        let h = cache.x_hat.sample(n);
        let out = gx.sample_mut(n);
        for c in 0..d.c {
            let k = gamma[c] * cache.inv_std[c] / m;
            for i in c * plane..(c + 1) * plane {
                out[i] = k * (m * g[i] - g_beta[c] - h[i] * g_gamma[c]);
            }
        }
    }
    gx.ensure_finite("batchnorm grad_x")?;
    Ok((gx, g_gamma, g_beta))
}
