//! The dual-stream network: forward, backward, parameter layout and summary.
//!
//! Parameter names follow `<stream>.l<layer>.<part>.<field>`:
//!
//! * plain layer: `conv.weight`, `conv.bias`, `bn.gamma`, `bn.beta`,
//!   `bn.running_mean`, `bn.running_var`
//! * two-branch block: `main.weight`, `main.bias`, `shortcut.weight`, `shortcut.bias`
//!
//! with `<stream>` one of `residual` / `joint`. The classifier is `head.weight` /
//! `head.bias`, or `head_residual.*` and `head_joint.*` under logit averaging.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::model::config::{Fusion, ModelConfig, PoolKind, STREAM_DEPTH};
use crate::ops::{
    batchnorm2d_backward, batchnorm2d_forward, conv2d_backward_with, conv2d_forward, global_avg_pool_backward,
    global_avg_pool_forward, linear_backward, linear_forward, maxpool_backward, maxpool_forward, relu_backward,
    relu_forward, BatchNormCache, BatchNormOptions, Mode, PoolWindow, RunningStats,
};
use crate::params::{ParamKind, ParamStore};
use crate::softpool::{softpool_backward, softpool_forward};
use crate::srm::{load_bank, FilterBank};
use crate::tensor::{Dims, Real, Tensor4};

pub const NUM_CLASSES: usize = 2;
const KERNEL: usize = 3;
const PIXEL_SCALE: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamKind {
    /// SRM residual maps of the 0–255 image.
    Residual,
    /// The RGB image scaled to 0–1.
    Joint,
}

impl StreamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StreamKind::Residual => "residual",
            StreamKind::Joint => "joint",
        }
    }
}

#[derive(Debug, Clone)]
struct LayerSpec {
    prefix: String,
    in_c: usize,
    out_c: usize,
    block: bool,
    pool: PoolKind,
}

impl LayerSpec {
    fn name(&self, part: &str) -> String {
        format!("{}.{part}", self.prefix)
    }
}

#[derive(Debug, Clone)]
struct StreamSpec {
    kind: StreamKind,
    layers: Vec<LayerSpec>,
}

impl StreamSpec {
    fn out_channels(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_c)
    }
}

enum PoolCache<T: Real> {
    Soft { input: Tensor4<T> },
    Max { argmax: Vec<usize>, input_dims: Dims },
}

enum LayerCache<T: Real> {
    Plain { input: Tensor4<T>, bn: BatchNormCache<T>, normed: Tensor4<T>, pool: PoolCache<T> },
    Block { input: Tensor4<T>, main_pre: Tensor4<T>, pool: PoolCache<T> },
}

struct StreamCache<T: Real> {
    layers: Vec<LayerCache<T>>,
    out_dims: Dims,
}

struct ForwardCache<T: Real> {
    streams: Vec<StreamCache<T>>,
    /// Pooled `(n, c, 1, 1)` features per stream.
    pooled: Vec<Tensor4<T>>,
    /// Input to the single linear head under concat / single-stream fusion.
    head_input: Option<Tensor4<T>>,
}

struct Pass<T: Real> {
    logits: Tensor4<T>,
    stream_outputs: Vec<Tensor4<T>>,
    cache: Option<ForwardCache<T>>,
    running: Vec<(String, RunningStats<T>)>,
}

/// One row of [`DualStreamModel::summary`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSummary {
    pub name: String,
    pub kind: String,
    pub input: Dims,
    pub output: Dims,
    pub params: usize,
}

/// Residual stream + joint channel stream + fusion head.
pub struct DualStreamModel<T: Real> {
    config: ModelConfig,
    bank: FilterBank,
    streams: Vec<StreamSpec>,
    pub params: ParamStore<T>,
    bn: BatchNormOptions,
    cache: Option<ForwardCache<T>>,
}

fn pool_forward<T: Real>(kind: PoolKind, x: Tensor4<T>, keep: bool) -> Result<(Tensor4<T>, Option<PoolCache<T>>)> {
    let win = PoolWindow::default();
    match kind {
        PoolKind::Softpool => {
            let y = softpool_forward(&x, win)?;
            Ok((y, keep.then_some(PoolCache::Soft { input: x })))
        }
        PoolKind::Maxpool => {
            let (y, argmax) = maxpool_forward(&x, win)?;
            Ok((y, keep.then(|| PoolCache::Max { argmax, input_dims: x.dims() })))
        }
    }
}

fn pool_backward<T: Real>(cache: &PoolCache<T>, grad: &Tensor4<T>) -> Result<Tensor4<T>> {
    match cache {
        PoolCache::Soft { input } => softpool_backward(grad, input, PoolWindow::default()),
        PoolCache::Max { argmax, input_dims } => maxpool_backward(grad, argmax, *input_dims),
    }
}

fn running_stats<T: Real>(params: &ParamStore<T>, layer: &LayerSpec) -> Result<RunningStats<T>> {
    Ok(RunningStats {
        mean: params.value(&layer.name("bn.running_mean"))?.data().to_vec(),
        var: params.value(&layer.name("bn.running_var"))?.data().to_vec(),
    })
}

fn run_layer<T: Real>(
    params: &ParamStore<T>,
    layer: &LayerSpec,
    x: Tensor4<T>,
    mode: Mode,
    bn_opts: BatchNormOptions,
    running: &mut Vec<(String, RunningStats<T>)>,
) -> Result<(Tensor4<T>, Option<LayerCache<T>>)> {
    let keep = mode == Mode::Train;
    if layer.block {
        let main_pre = conv2d_forward(
            &x,
            params.value(&layer.name("main.weight"))?,
            params.value(&layer.name("main.bias"))?.data(),
            1,
            1,
        )?;
        let (pooled, pool) = pool_forward(layer.pool, relu_forward(&main_pre), keep)?;
        let shortcut = conv2d_forward(
            &x,
            params.value(&layer.name("shortcut.weight"))?,
            params.value(&layer.name("shortcut.bias"))?.data(),
            2,
            1,
        )?;
        let y = pooled.add(&shortcut)?;
        let cache = pool.map(|pool| LayerCache::Block { input: x, main_pre, pool });
        Ok((y, cache))
    } else {
        let z = conv2d_forward(
            &x,
            params.value(&layer.name("conv.weight"))?,
            params.value(&layer.name("conv.bias"))?.data(),
            1,
            1,
        )?;
        let mut stats = running_stats(params, layer)?;
        let (normed, bn) = batchnorm2d_forward(
            &z,
            params.value(&layer.name("bn.gamma"))?.data(),
            params.value(&layer.name("bn.beta"))?.data(),
            &mut stats,
            mode,
            bn_opts,
        )?;
        if keep {
            running.push((layer.prefix.clone(), stats));
        }
        let (y, pool) = pool_forward(layer.pool, relu_forward(&normed), keep)?;
        let cache = match (bn, pool) {
            (Some(bn), Some(pool)) => Some(LayerCache::Plain { input: x, bn, normed, pool }),
            _ => None,
        };
        Ok((y, cache))
    }
}

impl<T: Real> DualStreamModel<T> {
    /// Builds the network with fan-in scaled normal initialization seeded by `seed`.
    pub fn build(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let bank = load_bank()?;
        let srm_channels = 3 * bank.members(&config.filter_subset)?.len();
        let mut streams = Vec::new();
        if config.fusion.uses_residual() {
            streams.push(Self::stream_spec(
                StreamKind::Residual,
                srm_channels,
                config.scaled_residual_channels(),
                &config.residual_block_layers,
                config.pooling_residual,
            ));
        }
        if config.fusion.uses_joint() {
            streams.push(Self::stream_spec(
                StreamKind::Joint,
                3,
                config.scaled_joint_channels(),
                &config.joint_block_layers(),
                config.pooling_joint,
            ));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let he = |dims: [usize; 4], fan_in: usize, rng: &mut ChaCha8Rng| {
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            Tensor4::from_fn(dims, |_, _, _, _| T::from_f64_lossy(normal.sample(rng)))
        };
        for s in &streams {
            for l in &s.layers {
                let fan_in = l.in_c * KERNEL * KERNEL;
                let wdims = [l.out_c, l.in_c, KERNEL, KERNEL];
                let bias = Tensor4::zeros([l.out_c, 1, 1, 1]);
                if l.block {
                    params.insert(l.name("main.weight"), ParamKind::ConvWeight, he(wdims, fan_in, &mut rng))?;
                    params.insert(l.name("main.bias"), ParamKind::ConvBias, bias.clone())?;
                    params.insert(l.name("shortcut.weight"), ParamKind::ConvWeight, he(wdims, fan_in, &mut rng))?;
                    params.insert(l.name("shortcut.bias"), ParamKind::ConvBias, bias)?;
                } else {
                    params.insert(l.name("conv.weight"), ParamKind::ConvWeight, he(wdims, fan_in, &mut rng))?;
                    params.insert(l.name("conv.bias"), ParamKind::ConvBias, bias.clone())?;
                    let ones = Tensor4::full([l.out_c, 1, 1, 1], T::one());
                    params.insert(l.name("bn.gamma"), ParamKind::BnGamma, ones.clone())?;
                    params.insert(l.name("bn.beta"), ParamKind::BnBeta, bias.clone())?;
                    params.insert(l.name("bn.running_mean"), ParamKind::BnRunningMean, bias)?;
                    params.insert(l.name("bn.running_var"), ParamKind::BnRunningVar, ones)?;
                }
            }
        }
        let mut head = |name: &str, features: usize, rng: &mut ChaCha8Rng| -> Result<()> {
            params.insert(format!("{name}.weight"), ParamKind::LinearWeight, he([NUM_CLASSES, features, 1, 1], features, rng))?;
            params.insert(format!("{name}.bias"), ParamKind::LinearBias, Tensor4::zeros([NUM_CLASSES, 1, 1, 1]))
        };
        match config.fusion {
            Fusion::LogitAvg => {
                for s in &streams {
                    head(&format!("head_{}", s.kind.as_str()), s.out_channels(), &mut rng)?;
                }
            }
            _ => head("head", streams.iter().map(StreamSpec::out_channels).sum(), &mut rng)?,
        }

        Ok(Self { config, bank, streams, params, bn: BatchNormOptions::default(), cache: None })
    }

    fn stream_spec(
        kind: StreamKind,
        in_c: usize,
        channels: [usize; STREAM_DEPTH],
        blocks: &std::collections::BTreeSet<usize>,
        pool: PoolKind,
    ) -> StreamSpec {
        let mut prev = in_c;
        let layers = channels
            .iter()
            .enumerate()
            .map(|(i, &out_c)| {
                let spec = LayerSpec {
                    prefix: format!("{}.l{}", kind.as_str(), i + 1),
                    in_c: prev,
                    out_c,
                    block: blocks.contains(&(i + 1)),
                    pool,
                };
                prev = out_c;
                spec
            })
            .collect();
        StreamSpec { kind, layers }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn stream_kinds(&self) -> Vec<StreamKind> {
        self.streams.iter().map(|s| s.kind).collect()
    }

    pub fn num_params(&self) -> usize {
        self.params.num_learnable()
    }

    pub fn set_batchnorm_options(&mut self, opts: BatchNormOptions) {
        self.bn = opts;
    }

    fn check_input(&self, x: &Tensor4<T>) -> Result<()> {
        let d = x.dims();
        if d.c != 3 || d.h != self.config.crop || d.w != self.config.crop {
            return Err(Error::shape(format!(
                "model expects (n, 3, {c}, {c}) input, got {d}",
                c = self.config.crop
            )));
        }
        Ok(())
    }

    /// The tensor a stream's first layer consumes.
    pub fn stream_input(&self, kind: StreamKind, x: &Tensor4<T>) -> Result<Tensor4<T>> {
        match kind {
            StreamKind::Residual => self.bank.apply(x, &self.config.filter_subset),
            StreamKind::Joint => Ok(x.scale(T::one() / T::from_f64_lossy(PIXEL_SCALE))),
        }
    }

    fn pass(&self, x: &Tensor4<T>, mode: Mode) -> Result<Pass<T>> {
        self.check_input(x)?;
        let keep = mode == Mode::Train;
        let mut running = Vec::new();
        let mut stream_outputs = Vec::new();
        let mut stream_caches = Vec::new();
        for s in &self.streams {
            let mut h = self.stream_input(s.kind, x)?;
            let mut layers = Vec::new();
            for l in &s.layers {
                let (y, cache) = run_layer(&self.params, l, h, mode, self.bn, &mut running)?;
                y.ensure_finite(&l.prefix)?;
                layers.extend(cache);
                h = y;
            }
            stream_caches.push(StreamCache { layers, out_dims: h.dims() });
            stream_outputs.push(h);
        }
        let pooled: Vec<Tensor4<T>> = stream_outputs.iter().map(global_avg_pool_forward).collect::<Result<_>>()?;

        let (logits, head_input) = match self.config.fusion {
            Fusion::LogitAvg => {
                let half = T::from_f64_lossy(0.5);
                let mut acc: Option<Tensor4<T>> = None;
                for (s, f) in self.streams.iter().zip(&pooled) {
                    let name = format!("head_{}", s.kind.as_str());
                    let l = linear_forward(f, self.params.value(&format!("{name}.weight"))?, self.params.value(&format!("{name}.bias"))?.data())?;
                    acc = Some(match acc {
                        None => l.scale(half),
                        Some(a) => a.add(&l.scale(half))?,
                    });
                }
                (acc.expect("logit averaging has two streams"), None)
            }
            _ => {
                let refs: Vec<&Tensor4<T>> = pooled.iter().collect();
                let input = Tensor4::concat_channels(&refs)?;
                let l = linear_forward(&input, self.params.value("head.weight")?, self.params.value("head.bias")?.data())?;
                (l, Some(input))
            }
        };
        logits.ensure_finite("logits")?;
        let cache = keep.then_some(ForwardCache { streams: stream_caches, pooled, head_input });
        Ok(Pass { logits, stream_outputs, cache, running })
    }

    /// Logits `(n, 2)`. Train mode caches intermediates for [`Self::backward`]
    /// and updates batch-norm running statistics.
    pub fn forward(&mut self, x: &Tensor4<T>, mode: Mode) -> Result<Tensor4<T>> {
        let pass = self.pass(x, mode)?;
        for (prefix, stats) in pass.running {
            self.params.value_mut(&format!("{prefix}.bn.running_mean"))?.data_mut().copy_from_slice(&stats.mean);
            self.params.value_mut(&format!("{prefix}.bn.running_var"))?.data_mut().copy_from_slice(&stats.var);
        }
        self.cache = pass.cache;
        Ok(pass.logits)
    }

    /// Eval-mode logits without touching any state.
    pub fn infer(&self, x: &Tensor4<T>) -> Result<Tensor4<T>> {
        Ok(self.pass(x, Mode::Eval)?.logits)
    }

    /// Eval-mode output map of every active stream, before pooling.
    pub fn stream_features(&self, x: &Tensor4<T>) -> Result<Vec<(StreamKind, Tensor4<T>)>> {
        let pass = self.pass(x, Mode::Eval)?;
        Ok(self.stream_kinds().into_iter().zip(pass.stream_outputs).collect())
    }

    /// Accumulates parameter gradients for `grad_logits` into `self.params`,
    /// consuming the cache of the last train-mode forward.
    pub fn backward(&mut self, grad_logits: &Tensor4<T>) -> Result<()> {
        let cache = self.cache.take().ok_or(Error::MissingCache("model"))?;
        let n = cache.pooled.first().map_or(0, |p| p.dims().n);
        grad_logits.expect_dims(Dims::new(n, NUM_CLASSES, 1, 1), "grad_logits")?;

        let pooled_grads: Vec<Tensor4<T>> = match self.config.fusion {
            Fusion::LogitAvg => {
                let g = grad_logits.scale(T::from_f64_lossy(0.5));
                let mut out = Vec::new();
                for (s, f) in self.streams.iter().zip(&cache.pooled) {
                    let name = format!("head_{}", s.kind.as_str());
                    let w = self.params.value(&format!("{name}.weight"))?;
                    let (gx, gw, gb) = linear_backward(&g, f, w)?;
                    self.params.accumulate_grad(&format!("{name}.weight"), gw.data())?;
                    self.params.accumulate_grad(&format!("{name}.bias"), &gb)?;
                    out.push(gx);
                }
                out
            }
            _ => {
                let input = cache.head_input.as_ref().ok_or(Error::MissingCache("head"))?;
                let (gx, gw, gb) = linear_backward(grad_logits, input, self.params.value("head.weight")?)?;
                self.params.accumulate_grad("head.weight", gw.data())?;
                self.params.accumulate_grad("head.bias", &gb)?;
                let widths: Vec<usize> = cache.pooled.iter().map(|p| p.dims().c).collect();
                gx.split_channels(&widths)?
            }
        };

        let streams = self.streams.clone();
        for ((spec, sc), gp) in streams.iter().zip(cache.streams).zip(pooled_grads) {
            let mut g = global_avg_pool_backward(&gp, sc.out_dims)?;
            for (idx, (layer, lc)) in spec.layers.iter().zip(sc.layers).enumerate().rev() {
                g = self.layer_backward(layer, lc, &g, idx > 0)?;
            }
        }
        Ok(())
    }

    fn layer_backward(&mut self, l: &LayerSpec, cache: LayerCache<T>, g: &Tensor4<T>, want_input_grad: bool) -> Result<Tensor4<T>> {
        match cache {
            LayerCache::Block { input, main_pre, pool } => {
                let g_act = pool_backward(&pool, g)?;
                let g_pre = relu_backward(&g_act, &main_pre)?;
                let main = conv2d_backward_with(&g_pre, &input, self.params.value(&l.name("main.weight"))?, 1, 1, want_input_grad)?;
                let short = conv2d_backward_with(g, &input, self.params.value(&l.name("shortcut.weight"))?, 2, 1, want_input_grad)?;
                self.params.accumulate_grad(&l.name("main.weight"), main.w.data())?;
                self.params.accumulate_grad(&l.name("main.bias"), &main.b)?;
                self.params.accumulate_grad(&l.name("shortcut.weight"), short.w.data())?;
                self.params.accumulate_grad(&l.name("shortcut.bias"), &short.b)?;
                match (main.x, short.x) {
                    (Some(a), Some(b)) => a.add(&b),
                    _ => Ok(Tensor4::zeros(input.dims())),
                }
            }
            LayerCache::Plain { input, bn, normed, pool } => {
                let g_act = pool_backward(&pool, g)?;
                let g_norm = relu_backward(&g_act, &normed)?;
                let (g_z, g_gamma, g_beta) =
                    batchnorm2d_backward(&g_norm, self.params.value(&l.name("bn.gamma"))?.data(), Some(&bn))?;
                self.params.accumulate_grad(&l.name("bn.gamma"), &g_gamma)?;
                self.params.accumulate_grad(&l.name("bn.beta"), &g_beta)?;
                let conv = conv2d_backward_with(&g_z, &input, self.params.value(&l.name("conv.weight"))?, 1, 1, want_input_grad)?;
                self.params.accumulate_grad(&l.name("conv.weight"), conv.w.data())?;
                self.params.accumulate_grad(&l.name("conv.bias"), &conv.b)?;
                Ok(conv.x.unwrap_or_else(|| Tensor4::zeros(input.dims())))
            }
        }
    }

    /// Per-layer shapes and parameter counts for a single `crop × crop` image.
    pub fn summary(&self) -> Vec<LayerSummary> {
        let crop = self.config.crop;
        let mut rows = Vec::new();
        let count = |names: &[String]| -> usize {
            names.iter().filter_map(|n| self.params.get(n).ok()).filter(|p| p.kind.is_learnable()).map(|p| p.value.len()).sum()
        };
        for s in &self.streams {
            let in_c = s.layers.first().map_or(0, |l| l.in_c);
            if s.kind == StreamKind::Residual {
                rows.push(LayerSummary {
                    name: "residual.srm".into(),
                    kind: format!("srm[{}] 5x5 reflect", self.config.filter_subset),
                    input: Dims::new(1, 3, crop, crop),
                    output: Dims::new(1, in_c, crop, crop),
                    params: 0,
                });
            }
            let mut size = crop;
            for l in &s.layers {
                let parts: &[&str] = if l.block {
                    &["main.weight", "main.bias", "shortcut.weight", "shortcut.bias"]
                } else {
                    &["conv.weight", "conv.bias", "bn.gamma", "bn.beta"]
                };
                let names: Vec<String> = parts.iter().map(|p| l.name(p)).collect();
                let kind = if l.block {
                    format!("block(conv3x3s1+relu+{} | conv3x3s2)", l.pool)
                } else {
                    format!("conv3x3s1+bn+relu+{}", l.pool)
                };
                rows.push(LayerSummary {
                    name: l.prefix.clone(),
                    kind,
                    input: Dims::new(1, l.in_c, size, size),
                    output: Dims::new(1, l.out_c, size / 2, size / 2),
                    params: count(&names),
                });
                size /= 2;
            }
        }
        let heads: Vec<String> = self.params.names().filter(|n| n.starts_with("head")).map(str::to_owned).collect();
        let features: usize = self.streams.iter().map(StreamSpec::out_channels).sum();
        rows.push(LayerSummary {
            name: "head".into(),
            kind: format!("gap+linear ({})", self.config.fusion),
            input: Dims::new(1, features, 1, 1),
            output: Dims::new(1, NUM_CLASSES, 1, 1),
            params: count(&heads),
        });
        rows
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14} {:<40} {:>14} {:>14} {:>10}", "layer", "type", "input", "output", "params");
        for r in self.summary() {
            let _ = writeln!(s, "{:<14} {:<40} {:>14} {:>14} {:>10}", r.name, r.kind, r.input.to_string(), r.output.to_string(), r.params);
        }
        let _ = writeln!(s, "total learnable parameters: {}", self.num_params());
        s
    }
}

impl DualStreamModel<f32> {
    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::from_store(&self.params, Some(self.config.to_json()))
    }

    /// Rebuilds a model from the config stored in the checkpoint and loads its tensors.
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let json = ck
            .config_json
            .as_deref()
            .ok_or_else(|| Error::Checkpoint("missing model config entry".into()))?;
        let config = ModelConfig::from_json(json)?;
        let mut model = Self::build(config, 0)?;
        model.params.assign_values(&ck.tensors)?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srm::FilterSubset;

    fn tiny(fusion: Fusion) -> ModelConfig {
        ModelConfig {
            fusion,
            crop: 32,
            width_multiplier: 0.25,
            filter_subset: FilterSubset::Kernel("square3x3".into()),
            ..Default::default()
        }
    }

    #[test]
    fn logits_are_n_by_2() {
        for fusion in [Fusion::Concat, Fusion::LogitAvg, Fusion::ResidualOnly, Fusion::JointOnly] {
            let mut m = DualStreamModel::<f32>::build(tiny(fusion), 1).unwrap();
            let x = Tensor4::from_fn([3, 3, 32, 32], |n, c, h, w| ((n * 31 + c * 17 + h * 7 + w * 3) % 256) as f32);
            let y = m.forward(&x, Mode::Train).unwrap();
            assert_eq!(y.dims(), Dims::new(3, 2, 1, 1));
            m.backward(&Tensor4::full(y.dims(), 0.1)).unwrap();
        }
    }

    #[test]
    fn wrong_crop_is_rejected() {
        let m = DualStreamModel::<f32>::build(tiny(Fusion::Concat), 1).unwrap();
        assert!(m.infer(&Tensor4::zeros([1, 3, 64, 64])).is_err());
    }

    #[test]
    fn backward_requires_cache() {
        let mut m = DualStreamModel::<f32>::build(tiny(Fusion::Concat), 1).unwrap();
        assert!(matches!(m.backward(&Tensor4::zeros([1, 2, 1, 1])), Err(Error::MissingCache(_))));
        let x = Tensor4::full([2, 3, 32, 32], 9.0);
        m.forward(&x, Mode::Eval).unwrap();
        assert!(matches!(m.backward(&Tensor4::zeros([2, 2, 1, 1])), Err(Error::MissingCache(_))));
    }

    #[test]
    fn zero_loss_grad_gives_zero_param_grads() {
        let mut m = DualStreamModel::<f64>::build(tiny(Fusion::Concat), 3).unwrap();
        let x = Tensor4::from_fn([2, 3, 32, 32], |n, c, h, w| ((n * 5 + c * 11 + h * h + w) % 255) as f64);
        m.forward(&x, Mode::Train).unwrap();
        m.backward(&Tensor4::zeros([2, 2, 1, 1])).unwrap();
        for (_, p) in m.params.iter() {
            if let Some(g) = &p.grad {
                assert!(g.data().iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn default_parameter_count() {
        let m = DualStreamModel::<f32>::build(ModelConfig::default(), 0).unwrap();
        assert_eq!(m.num_params(), 877_570);
    }

    #[test]
    fn build_is_deterministic_per_seed() {
        let a = DualStreamModel::<f32>::build(tiny(Fusion::Concat), 5).unwrap();
        let b = DualStreamModel::<f32>::build(tiny(Fusion::Concat), 5).unwrap();
        let c = DualStreamModel::<f32>::build(tiny(Fusion::Concat), 6).unwrap();
        let w = |m: &DualStreamModel<f32>| m.params.value("residual.l1.conv.weight").unwrap().clone();
        assert_eq!(w(&a), w(&b));
        assert_ne!(w(&a), w(&c));
    }

    #[test]
    fn summary_lists_every_layer() {
        let m = DualStreamModel::<f32>::build(ModelConfig::default(), 0).unwrap();
        let rows = m.summary();
        // srm + 5 residual + 5 joint + head
        assert_eq!(rows.len(), 12);
        assert_eq!(rows.iter().map(|r| r.params).sum::<usize>(), m.num_params());
        let last_res = rows.iter().find(|r| r.name == "residual.l5").unwrap();
        assert_eq!(last_res.output, Dims::new(1, 128, 7, 7));
    }
}
