//! Gradient checks for every backward pass and for a small whole model.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{gradient_check, GradCheckReport};
use crate::error::Result;
use crate::model::{DualStreamModel, Fusion, ModelConfig};
use crate::ops::*;
use crate::softpool::{softpool_backward, softpool_forward, SoftPoolConfig};
use crate::tensor::{Dims, Tensor4};

/// Maximum relative error allowed per check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub conv: f64,
    pub linear: f64,
    pub softpool: f64,
    pub batchnorm: f64,
    pub relu: f64,
    pub cross_entropy: f64,
    pub pooling: f64,
    pub model: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            conv: 1e-5,
            linear: 1e-5,
            softpool: 1e-5,
            batchnorm: 1e-4,
            relu: 1e-4,
            cross_entropy: 1e-4,
            pooling: 1e-5,
            model: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Model coordinates sampled in the whole-model checks.
    pub model_coords: usize,
    /// Scales the analytic SoftPool gradient by 1.01; the softpool check must then fail.
    pub perturb_softpool: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, tolerances: Tolerances::default(), model_coords: 50, perturb_softpool: false }
    }
}

fn random(rng: &mut impl Rng, dims: impl Into<Dims>) -> Tensor4<f64> {
    Tensor4::from_fn(dims, |_, _, _, _| rng.gen_range(-1.0..1.0))
}

/// Splits a flat vector into consecutive tensors of the given shapes.
fn unpack(flat: &[f64], shapes: &[Dims]) -> Vec<Tensor4<f64>> {
    let mut at = 0;
    shapes
        .iter()
        .map(|&d| {
            let t = Tensor4::from_vec(d, flat[at..at + d.len()].to_vec()).expect("length matches");
            at += d.len();
            t
        })
        .collect()
}

fn pack(parts: &[&[f64]]) -> Vec<f64> {
    parts.concat()
}

/// Checks `f`, which maps packed inputs to `(loss, packed analytic gradient)`.
fn check(
    name: &str,
    tol: f64,
    point: Vec<f64>,
    f: impl Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
) -> Result<GradCheckReport> {
    let (_, analytic) = f(&point)?;
    gradient_check(name, |p| Ok(f(p)?.0), &point, &analytic, None, tol)
}

/// Projects an output onto fixed random weights so the loss depends on every element.
fn project(y: &Tensor4<f64>, r: &Tensor4<f64>) -> f64 {
    y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

fn conv_check(rng: &mut impl Rng, stride: usize, tol: f64) -> Result<GradCheckReport> {
    let (xd, wd) = (Dims::new(2, 3, 6, 6), Dims::new(4, 3, 3, 3));
    let x = random(rng, xd);
    let w = random(rng, wd);
    let b = random(rng, [1, 1, 1, 4]);
    let od = conv2d_forward(&x, &w, b.data(), stride, 1)?.dims();
    let r = random(rng, od);
    let shapes = [xd, wd, b.dims()];
    check(&format!("conv2d_s{stride}"), tol, pack(&[x.data(), w.data(), b.data()]), |p| {
        let t = unpack(p, &shapes);
        let y = conv2d_forward(&t[0], &t[1], t[2].data(), stride, 1)?;
        let (gx, gw, gb) = conv2d_backward(&r, &t[0], &t[1], stride, 1)?;
        Ok((project(&y, &r), pack(&[gx.data(), gw.data(), &gb])))
    })
}

fn batchnorm_check(rng: &mut impl Rng, tol: f64) -> Result<GradCheckReport> {
    let xd = Dims::new(4, 3, 3, 3);
    let x = random(rng, xd).scale(2.0);
    let gamma = random(rng, [1, 1, 1, 3]);
    let beta = random(rng, [1, 1, 1, 3]);
    let r = random(rng, xd);
    let shapes = [xd, gamma.dims(), beta.dims()];
    check("batchnorm_train", tol, pack(&[x.data(), gamma.data(), beta.data()]), |p| {
        let t = unpack(p, &shapes);
        let mut running = RunningStats::new(3);
        let (y, cache) =
            batchnorm2d_forward(&t[0], t[1].data(), t[2].data(), &mut running, Mode::Train, BatchNormOptions::default())?;
        let (gx, gg, gb) = batchnorm2d_backward(&r, t[1].data(), cache.as_ref())?;
        Ok((project(&y, &r), pack(&[gx.data(), &gg, &gb])))
    })
}

fn relu_check(rng: &mut impl Rng, tol: f64) -> Result<GradCheckReport> {
    // Keep every input at least 0.1 away from the kink.
    let x = Tensor4::from_fn([2, 3, 4, 4], |_, _, _, _| {
        let m: f64 = rng.gen_range(0.1..1.0);
        if rng.gen_bool(0.5) { m } else { -m }
    });
    let r = random(rng, x.dims());
    let d = x.dims();
    check("relu", tol, x.data().to_vec(), |p| {
        let x = Tensor4::from_vec(d, p.to_vec())?;
        Ok((project(&relu_forward(&x), &r), relu_backward(&r, &x)?.into_vec()))
    })
}

fn linear_check(rng: &mut impl Rng, tol: f64) -> Result<GradCheckReport> {
    let (xd, wd) = (Dims::new(3, 5, 1, 1), Dims::new(2, 5, 1, 1));
    let x = random(rng, xd);
    let w = random(rng, wd);
    let b = random(rng, [1, 1, 1, 2]);
    let r = random(rng, [3, 2, 1, 1]);
    let shapes = [xd, wd, b.dims()];
    check("linear", tol, pack(&[x.data(), w.data(), b.data()]), |p| {
        let t = unpack(p, &shapes);
        let y = linear_forward(&t[0], &t[1], t[2].data())?;
        let (gx, gw, gb) = linear_backward(&r, &t[0], &t[1])?;
        Ok((project(&y, &r), pack(&[gx.data(), gw.data(), &gb])))
    })
}

fn softpool_check(rng: &mut impl Rng, tol: f64, perturb: bool) -> Result<GradCheckReport> {
    let x = random(rng, [2, 2, 4, 4]).scale(2.0);
    let cfg = SoftPoolConfig::default();
    let r = random(rng, [2, 2, 2, 2]);
    let d = x.dims();
    check("softpool", tol, x.data().to_vec(), |p| {
        let x = Tensor4::from_vec(d, p.to_vec())?;
        let mut g = softpool_backward(&r, &x, cfg)?;
        if perturb {
            g = g.scale(1.01);
        }
        Ok((project(&softpool_forward(&x, cfg)?, &r), g.into_vec()))
    })
}

fn maxpool_check(rng: &mut impl Rng, tol: f64) -> Result<GradCheckReport> {
    // Distinct values spaced well beyond the step so no window has a near tie.
    let mut vals: Vec<f64> = (0..64).map(|i| i as f64 * 0.05).collect();
    for i in (1..vals.len()).rev() {
        vals.swap(i, rng.gen_range(0..=i));
    }
    let d = Dims::new(2, 2, 4, 4);
    let r = random(rng, [2, 2, 2, 2]);
    check("maxpool", tol, vals, |p| {
        let x = Tensor4::from_vec(d, p.to_vec())?;
        let (y, argmax) = maxpool_forward(&x, PoolWindow::default())?;
        Ok((project(&y, &r), maxpool_backward(&r, &argmax, d)?.into_vec()))
    })
}

fn gap_check(rng: &mut impl Rng, tol: f64) -> Result<GradCheckReport> {
    let x = random(rng, [2, 3, 3, 3]);
    let r = random(rng, [2, 3, 1, 1]);
    let d = x.dims();
    check("global_avg_pool", tol, x.data().to_vec(), |p| {
        let x = Tensor4::from_vec(d, p.to_vec())?;
        Ok((project(&global_avg_pool_forward(&x)?, &r), global_avg_pool_backward(&r, d)?.into_vec()))
    })
}

fn cross_entropy_check(rng: &mut impl Rng, tol: f64) -> Result<GradCheckReport> {
    let logits = random(rng, [5, 2, 1, 1]).scale(3.0);
    let labels: Vec<usize> = (0..5).map(|_| rng.gen_range(0..2)).collect();
    let d = logits.dims();
    check("cross_entropy", tol, logits.into_vec(), |p| {
        let (loss, grad) = softmax_cross_entropy(&Tensor4::from_vec(d, p.to_vec())?, &labels)?;
        Ok((loss, grad.into_vec()))
    })
}

/// Whole-model check on `coords` randomly chosen learnable parameters.
pub fn model_check(fusion: Fusion, seed: u64, coords: usize, tol: f64) -> Result<GradCheckReport> {
    let config = ModelConfig { fusion, crop: 32, width_multiplier: 0.25, ..ModelConfig::default() };
    let mut model = DualStreamModel::<f64>::build(config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_64656c);
    let x = Tensor4::from_fn([4, 3, 32, 32], |_, _, _, _| rng.gen_range(0.0..255.0));
    let labels = vec![0, 1, 0, 1];

    let logits = model.forward(&x, Mode::Train)?;
    let (_, grad) = softmax_cross_entropy(&logits, &labels)?;
    model.params.zero_grads();
    model.backward(&grad)?;

    let mut coordinates = Vec::new();
    for (name, p) in model.params.iter() {
        if p.kind.is_learnable() {
            coordinates.extend((0..p.value.len()).map(|j| (name.to_owned(), j)));
        }
    }
    let picked: Vec<(String, usize)> =
        sample(&mut rng, coordinates.len(), coords.min(coordinates.len())).into_iter().map(|i| coordinates[i].clone()).collect();
    let mut point = Vec::new();
    let mut analytic = Vec::new();
    for (name, j) in &picked {
        let p = model.params.get(name)?;
        point.push(p.value.data()[*j]);
        analytic.push(p.grad.as_ref().map_or(0.0, |g| g.data()[*j]));
    }
    let loss = |values: &[f64]| -> Result<f64> {
        for ((name, j), &v) in picked.iter().zip(values) {
            model.params.value_mut(name)?.data_mut()[*j] = v;
        }
        let logits = model.forward(&x, Mode::Train)?;
        Ok(softmax_cross_entropy(&logits, &labels)?.0)
    };
    gradient_check(&format!("model_{fusion}"), loss, &point, &analytic, None, tol)
}

/// Runs every check at 64-bit precision. A failing check is reported, not returned as an error.
pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<GradCheckReport>> {
    let tol = &opts.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    Ok(vec![
        conv_check(&mut rng, 1, tol.conv)?,
        conv_check(&mut rng, 2, tol.conv)?,
        batchnorm_check(&mut rng, tol.batchnorm)?,
        relu_check(&mut rng, tol.relu)?,
        linear_check(&mut rng, tol.linear)?,
        softpool_check(&mut rng, tol.softpool, opts.perturb_softpool)?,
        maxpool_check(&mut rng, tol.pooling)?,
        gap_check(&mut rng, tol.pooling)?,
        cross_entropy_check(&mut rng, tol.cross_entropy)?,
        model_check(Fusion::Concat, opts.seed, opts.model_coords, tol.model)?,
        model_check(Fusion::LogitAvg, opts.seed, opts.model_coords, tol.model)?,
    ])
}
