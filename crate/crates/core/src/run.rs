//! Resolved run settings: defaults, then a `key=value` file, then flag overrides.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::optim::SgdConfig;

/// Every key accepted in a config file. Each maps to the `--kebab-case` flag
/// of the same name.
pub const CONFIG_KEYS: [&str; 21] = [
    "lr",
    "batch_size",
    "epochs",
    "lr_step",
    "lr_gamma",
    "weight_decay",
    "seed",
    "fusion",
    "pooling_residual",
    "pooling_joint",
    "residual_layers",
    "joint_residual_blocks",
    "filter_set",
    "crop",
    "width_multiplier",
    "train_manifest",
    "val_manifest",
    "test_manifest",
    "checkpoint",
    "log",
    "split_ratios",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sgd: SgdConfig,
    pub model: ModelConfig,
    pub seed: u64,
    pub train_manifest: Option<PathBuf>,
    pub val_manifest: Option<PathBuf>,
    pub test_manifest: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub log: Option<PathBuf>,
    /// Train/val/test proportions for re-splitting.
    pub split_ratios: [f64; 3],
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sgd: SgdConfig::default(),
            model: ModelConfig::default(),
            seed: 0,
            train_manifest: None,
            val_manifest: None,
            test_manifest: None,
            checkpoint: None,
            log: None,
            split_ratios: [3.0, 1.0, 1.0],
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn path_str(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

fn opt_path(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl RunConfig {
    /// Sets one key. Flag spellings (`batch-size`) are accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let key = key.trim().replace('-', "_");
        let m = &mut self.model;
        match key.as_str() {
            "lr" => self.sgd.lr0 = parse(&key, value)?,
            "batch_size" => self.sgd.batch_size = parse(&key, value)?,
            "epochs" => self.sgd.epochs = parse(&key, value)?,
            "lr_step" => self.sgd.lr_step_epochs = parse(&key, value)?,
            "lr_gamma" => self.sgd.lr_gamma = parse(&key, value)?,
            "weight_decay" => self.sgd.weight_decay = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "fusion" => m.fusion = value.parse()?,
            "pooling_residual" => m.pooling_residual = value.parse()?,
            "pooling_joint" => m.pooling_joint = value.parse()?,
            "residual_layers" => m.residual_block_layers = ModelConfig::parse_layers(value)?,
            "joint_residual_blocks" => m.joint_stream_residual_blocks = parse(&key, value)?,
            "filter_set" => m.filter_subset = value.parse()?,
            "crop" => m.crop = parse(&key, value)?,
            "width_multiplier" => m.width_multiplier = parse(&key, value)?,
            "train_manifest" => self.train_manifest = opt_path(value),
            "val_manifest" => self.val_manifest = opt_path(value),
            "test_manifest" => self.test_manifest = opt_path(value),
            "checkpoint" => self.checkpoint = opt_path(value),
            "log" => self.log = opt_path(value),
            "split_ratios" => self.split_ratios = crate::data::parse_ratios(value)?,
            _ => return Err(Error::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file body. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
            self.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Defaults, then `file`, then `overrides` in order.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_text(&text)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sgd.validate()?;
        self.model.validate()
    }

    /// Every key with its current value, in [`CONFIG_KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let m = &self.model;
        let values = [
            self.sgd.lr0.to_string(),
            self.sgd.batch_size.to_string(),
            self.sgd.epochs.to_string(),
            self.sgd.lr_step_epochs.to_string(),
            self.sgd.lr_gamma.to_string(),
            self.sgd.weight_decay.to_string(),
            self.seed.to_string(),
            m.fusion.to_string(),
            m.pooling_residual.to_string(),
            m.pooling_joint.to_string(),
            if m.residual_block_layers.is_empty() { "none".into() } else { m.residual_layers_string() },
            m.joint_stream_residual_blocks.to_string(),
            m.filter_subset.to_string(),
            m.crop.to_string(),
            m.width_multiplier.to_string(),
            path_str(&self.train_manifest),
            path_str(&self.val_manifest),
            path_str(&self.test_manifest),
            path_str(&self.checkpoint),
            path_str(&self.log),
            self.split_ratios.map(|r| r.to_string()).join(":"),
        ];
        CONFIG_KEYS.into_iter().zip(values).collect()
    }

    /// The resolved config as a `key=value` file body, parseable by [`Self::apply_text`].
    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
