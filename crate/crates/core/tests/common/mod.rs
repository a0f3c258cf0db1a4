//! Independent naive-loop oracles shared by the integration tests.
#![allow(dead_code)]

use cgdetect::srm::SrmKernel;
use cgdetect::Tensor4;
use rand::Rng;

pub fn random(rng: &mut impl Rng, dims: [usize; 4], lo: f64, hi: f64) -> Tensor4<f64> {
    Tensor4::from_fn(dims, |_, _, _, _| rng.gen_range(lo..hi))
}

/// Direct 7-loop cross-correlation with zero padding.
pub fn conv2d(x: &Tensor4<f64>, w: &Tensor4<f64>, b: &[f64], stride: usize, pad: usize) -> Tensor4<f64> {
    let (xd, wd) = (x.dims(), w.dims());
    let oh = (xd.h + 2 * pad - wd.h) / stride + 1;
    let ow = (xd.w + 2 * pad - wd.w) / stride + 1;
    let mut y = Tensor4::zeros([xd.n, wd.n, oh, ow]);
    for n in 0..xd.n {
        for o in 0..wd.n {
            for i in 0..oh {
                for j in 0..ow {
                    let mut acc = b[o];
                    for c in 0..xd.c {
                        for ki in 0..wd.h {
                            for kj in 0..wd.w {
                                let r = (i * stride + ki) as isize - pad as isize;
                                let s = (j * stride + kj) as isize - pad as isize;
                                if r >= 0 && s >= 0 && (r as usize) < xd.h && (s as usize) < xd.w {
                                    acc += x.at(n, c, r as usize, s as usize) * w.at(o, c, ki, kj);
                                }
                            }
                        }
                    }
                    y.set(n, o, i, j, acc);
                }
            }
        }
    }
    y
}

/// Two-pass batch statistics (biased variance) then affine transform.
pub fn batchnorm_train(x: &Tensor4<f64>, gamma: &[f64], beta: &[f64], eps: f64) -> Tensor4<f64> {
    let d = x.dims();
    let m = (d.n * d.h * d.w) as f64;
    let mut y = x.clone();
    for c in 0..d.c {
        let mut vals = Vec::new();
        for n in 0..d.n {
            for i in 0..d.h {
                for j in 0..d.w {
                    vals.push(x.at(n, c, i, j));
                }
            }
        }
        let mean = vals.iter().sum::<f64>() / m;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        for n in 0..d.n {
            for i in 0..d.h {
                for j in 0..d.w {
                    let v = (x.at(n, c, i, j) - mean) / (var + eps).sqrt();
                    y.set(n, c, i, j, gamma[c] * v + beta[c]);
                }
            }
        }
    }
    y
}

pub fn global_avg_pool(x: &Tensor4<f64>) -> Tensor4<f64> {
    let d = x.dims();
    Tensor4::from_fn([d.n, d.c, 1, 1], |n, c, _, _| {
        let mut s = 0.0;
        for i in 0..d.h {
            for j in 0..d.w {
                s += x.at(n, c, i, j);
            }
        }
        s / (d.h * d.w) as f64
    })
}

/// Mirror index without repeating the edge sample.
pub fn mirror(i: isize, len: usize) -> usize {
    let last = len as isize - 1;
    let mut i = i;
    while i < 0 || i > last {
        i = if i < 0 { -i } else { 2 * last - i };
    }
    i as usize
}

/// Each kernel applied to each colour channel, channel `3k + c`.
pub fn apply_kernels(x: &Tensor4<f64>, kernels: &[&SrmKernel]) -> Tensor4<f64> {
    let d = x.dims();
    let mut y = Tensor4::zeros([d.n, 3 * kernels.len(), d.h, d.w]);
    for n in 0..d.n {
        for (k, kernel) in kernels.iter().enumerate() {
            for c in 0..3 {
                for i in 0..d.h {
                    for j in 0..d.w {
                        let mut acc = 0.0;
                        for (a, row) in kernel.taps.iter().enumerate() {
                            for (b, &t) in row.iter().enumerate() {
                                let r = mirror(i as isize + a as isize - 2, d.h);
                                let s = mirror(j as isize + b as isize - 2, d.w);
                                acc += f64::from(t) * x.at(n, c, r, s);
                            }
                        }
                        y.set(n, 3 * k + c, i, j, acc / f64::from(kernel.normalizer));
                    }
                }
            }
        }
    }
    y
}

/// SoftPool of one window straight from the definition, without max subtraction.
pub fn softpool_window(vals: &[f64]) -> f64 {
    let total: f64 = vals.iter().map(|v| v.exp()).sum();
    vals.iter().map(|v| v.exp() / total * v).sum()
}
