//! Named learnable arrays, their gradients and batch-norm running statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    ConvWeight,
    ConvBias,
    BnGamma,
    BnBeta,
    BnRunningMean,
    BnRunningVar,
    LinearWeight,
    LinearBias,
}

impl ParamKind {
    /// Running statistics are state, not parameters: no gradient, no optimizer update.
    pub fn is_learnable(self) -> bool {
        !matches!(self, ParamKind::BnRunningMean | ParamKind::BnRunningVar)
    }

    /// Weight decay applies to conv and linear weights only.
    pub fn decays(self) -> bool {
        matches!(self, ParamKind::ConvWeight | ParamKind::LinearWeight)
    }
}

#[derive(Debug, Clone)]
pub struct Param<T: Real> {
    pub kind: ParamKind,
    pub value: Tensor4<T>,
    /// Same dims as `value`; `None` for running statistics.
    pub grad: Option<Tensor4<T>>,
}

impl<T: Real> Param<T> {
    pub fn new(kind: ParamKind, value: Tensor4<T>) -> Self {
        let grad = kind.is_learnable().then(|| Tensor4::zeros(value.dims()));
        Self { kind, value, grad }
    }
}

/// Ordered by name, which fixes iteration order and checkpoint layout.
#[derive(Debug, Clone, Default)]
pub struct ParamStore<T: Real> {
    entries: BTreeMap<String, Param<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: impl Into<String>, kind: ParamKind, value: Tensor4<T>) -> Result<()> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(Error::invalid(format!("duplicate parameter name `{name}`")));
        }
        self.entries.insert(name, Param::new(kind, value));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Param<T>> {
        self.entries.get(name).ok_or_else(|| Error::unknown("parameter", name))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Param<T>> {
        self.entries.get_mut(name).ok_or_else(|| Error::unknown("parameter", name))
    }

    pub fn value(&self, name: &str) -> Result<&Tensor4<T>> {
        Ok(&self.get(name)?.value)
    }

    pub fn value_mut(&mut self, name: &str) -> Result<&mut Tensor4<T>> {
        Ok(&mut self.get_mut(name)?.value)
    }

    /// Adds `delta` into the gradient buffer of `name`.
    pub fn accumulate_grad(&mut self, name: &str, delta: &[T]) -> Result<()> {
        let p = self.get_mut(name)?;
        let grad = p
            .grad
            .as_mut()
            .ok_or_else(|| Error::invalid(format!("`{name}` is not learnable")))?;
        if grad.len() != delta.len() {
            return Err(Error::shape(format!(
                "gradient for `{name}` has {} values, expected {}",
                delta.len(),
                grad.len()
            )));
        }
        for (g, &d) in grad.data_mut().iter_mut().zip(delta) {
            *g += d;
        }
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        for p in self.entries.values_mut() {
            if let Some(g) = p.grad.as_mut() {
                g.fill(T::zero());
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param<T>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param<T>)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of learnable scalars.
    pub fn num_learnable(&self) -> usize {
        self.entries.values().filter(|p| p.kind.is_learnable()).map(|p| p.value.len()).sum()
    }

    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        let entries = self
            .entries
            .iter()
            .map(|(k, p)| {
                let q = Param { kind: p.kind, value: p.value.cast(), grad: p.grad.as_ref().map(Tensor4::cast) };
                (k.clone(), q)
            })
            .collect();
        ParamStore { entries }
    }

    /// Replaces values by name; every stored name must be present with matching dims.
    pub fn assign_values(&mut self, tensors: &[(String, Tensor4<T>)]) -> Result<()> {
        if tensors.len() != self.entries.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {} tensors, model has {}",
                tensors.len(),
                self.entries.len()
            )));
        }
        for (name, t) in tensors {
            let p = self
                .entries
                .get_mut(name)
                .ok_or_else(|| Error::Checkpoint(format!("unexpected tensor `{name}`")))?;
            if p.value.dims() != t.dims() {
                return Err(Error::Checkpoint(format!(
                    "`{name}`: checkpoint dims {} vs model dims {}",
                    t.dims(),
                    p.value.dims()
                )));
            }
            p.value = t.clone();
        }
        self.zero_grads();
        Ok(())
    }
}
