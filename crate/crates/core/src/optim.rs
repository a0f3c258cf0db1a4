//! Plain SGD with a step learning-rate schedule and L2 weight decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParamStore;
use crate::tensor::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub lr0: f64,
    pub lr_gamma: f64,
    pub lr_step_epochs: usize,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { lr0: 1e-3, lr_gamma: 0.5, lr_step_epochs: 20, weight_decay: 1e-3, batch_size: 64, epochs: 120 }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr0 > 0.0
            && self.lr_gamma > 0.0
            && self.lr_gamma <= 1.0
            && self.lr_step_epochs >= 1
            && self.weight_decay >= 0.0
            && self.batch_size >= 1;
        if !ok {
            return Err(Error::Config(format!("invalid SGD settings: {self:?}")));
        }
        Ok(())
    }

    /// `lr0 · gamma^⌊epoch / step⌋`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr0 * self.lr_gamma.powi((epoch / self.lr_step_epochs.max(1)) as i32)
    }
}

/// One update `p ← p − lr·(grad + wd·p)` over all learnable entries, then zeroes gradients.
///
/// Weight decay only touches conv and linear weights.
pub fn sgd_step<T: Real>(params: &mut ParamStore<T>, epoch: usize, cfg: &SgdConfig) {
    let lr = T::from_f64_lossy(cfg.lr_at(epoch));
    let wd = T::from_f64_lossy(cfg.weight_decay);
    for (_, p) in params.iter_mut() {
        let decay = if p.kind.decays() { wd } else { T::zero() };
        let Some(grad) = p.grad.as_mut() else { continue };
        for (v, g) in p.value.data_mut().iter_mut().zip(grad.data_mut()) {
            *v -= lr * (*g + decay * *v);
            *g = T::zero();
        }
    }
}
