use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::srm::FilterSubset;

/// Number of conv layers in each stream.
pub const STREAM_DEPTH: usize = 5;

/// How the two streams become two logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fusion {
    /// Pooled features of both streams concatenated into one linear head.
    Concat,
    /// One linear head per stream, logits averaged.
    LogitAvg,
    ResidualOnly,
    JointOnly,
}

impl Fusion {
    pub fn uses_residual(self) -> bool {
        self != Fusion::JointOnly
    }

    pub fn uses_joint(self) -> bool {
        self != Fusion::ResidualOnly
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Fusion::Concat => "concat",
            Fusion::LogitAvg => "logit_avg",
            Fusion::ResidualOnly => "residual_only",
            Fusion::JointOnly => "joint_only",
        }
    }
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Fusion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "concat" => Fusion::Concat,
            "logit_avg" => Fusion::LogitAvg,
            "residual_only" => Fusion::ResidualOnly,
            "joint_only" => Fusion::JointOnly,
            other => return Err(Error::unknown("fusion mode", other)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    Softpool,
    Maxpool,
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolKind::Softpool => "softpool",
            PoolKind::Maxpool => "maxpool",
        })
    }
}

impl FromStr for PoolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softpool" => Ok(PoolKind::Softpool),
            "maxpool" => Ok(PoolKind::Maxpool),
            other => Err(Error::unknown("pooling", other)),
        }
    }
}

/// Every architecture knob of the dual-stream network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub fusion: Fusion,
    /// 1-based layer indices of the residual stream built as two-branch blocks.
    pub residual_block_layers: BTreeSet<usize>,
    /// When set, joint-stream layers 2–4 are two-branch blocks too.
    pub joint_stream_residual_blocks: bool,
    pub pooling_residual: PoolKind,
    pub pooling_joint: PoolKind,
    pub filter_subset: FilterSubset,
    pub residual_channels: [usize; STREAM_DEPTH],
    pub joint_channels: [usize; STREAM_DEPTH],
    pub crop: usize,
    pub width_multiplier: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            fusion: Fusion::Concat,
            residual_block_layers: BTreeSet::from([2, 3, 4]),
            joint_stream_residual_blocks: false,
            pooling_residual: PoolKind::Softpool,
            pooling_joint: PoolKind::Softpool,
            filter_subset: FilterSubset::All30,
            residual_channels: [32, 64, 96, 128, 128],
            joint_channels: [32, 64, 96, 128, 128],
            crop: 224,
            width_multiplier: 1.0,
        }
    }
}

/// Joint-stream layers that become blocks when the joint flag is set.
pub const MIDDLE_LAYERS: [usize; 3] = [2, 3, 4];

/// Total spatial reduction of a stream (one 2× pooling per layer).
pub const STREAM_REDUCTION: usize = 1 << STREAM_DEPTH;

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.crop == 0 || self.crop % STREAM_REDUCTION != 0 {
            return Err(Error::Config(format!("crop {} must be a positive multiple of {STREAM_REDUCTION}", self.crop)));
        }
        if let Some(bad) = self.residual_block_layers.iter().find(|&&l| !(1..=STREAM_DEPTH).contains(&l)) {
            return Err(Error::Config(format!("residual block layer {bad} outside 1..={STREAM_DEPTH}")));
        }
        if !(self.width_multiplier > 0.0 && self.width_multiplier.is_finite()) {
            return Err(Error::Config(format!("width multiplier {} must be positive", self.width_multiplier)));
        }
        if self.residual_channels.contains(&0) || self.joint_channels.contains(&0) {
            return Err(Error::Config("channel schedule entries must be positive".into()));
        }
        Ok(())
    }

    fn scale(&self, c: usize) -> usize {
        ((c as f64 * self.width_multiplier).round() as usize).max(1)
    }

    pub fn scaled_residual_channels(&self) -> [usize; STREAM_DEPTH] {
        self.residual_channels.map(|c| self.scale(c))
    }

    pub fn scaled_joint_channels(&self) -> [usize; STREAM_DEPTH] {
        self.joint_channels.map(|c| self.scale(c))
    }

    pub fn joint_block_layers(&self) -> BTreeSet<usize> {
        if self.joint_stream_residual_blocks {
            MIDDLE_LAYERS.into_iter().collect()
        } else {
            BTreeSet::new()
        }
    }

    /// Spatial size of each stream's output map.
    pub fn feature_size(&self) -> usize {
        self.crop / STREAM_REDUCTION
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(format!("model config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Comma-separated layer list, e.g. `2,3,4`; empty string for none.
    pub fn residual_layers_string(&self) -> String {
        self.residual_block_layers.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse_layers(s: &str) -> Result<BTreeSet<usize>> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(BTreeSet::new());
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad layer index `{t}`"))))
            .collect()
    }
}
