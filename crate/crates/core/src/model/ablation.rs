//! Named architecture variants for the ablation study.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::config::{Fusion, ModelConfig, PoolKind};
use crate::srm::FilterSubset;

/// Every fixed variant name accepted by [`ablation_variant`] (plus `subset:<name>`).
pub const VARIANT_NAMES: [&str; 12] = [
    "default",
    "VA",
    "VB",
    "VC",
    "M1",
    "M2",
    "M3",
    "layers3",
    "layers4",
    "layers5",
    "only_residual",
    "only_joint",
];

/// Applies the named variant on top of `base` (which supplies crop, width, schedules).
pub fn ablation_variant_from(base: &ModelConfig, name: &str) -> Result<ModelConfig> {
    let mut cfg = base.clone();
    // Start from the proposed architecture, then apply the single change.
    cfg.fusion = Fusion::Concat;
    cfg.residual_block_layers = BTreeSet::from([2, 3, 4]);
    cfg.joint_stream_residual_blocks = false;
    cfg.pooling_residual = PoolKind::Softpool;
    cfg.pooling_joint = PoolKind::Softpool;
    cfg.filter_subset = FilterSubset::All30;
    match name {
        "default" | "layers3" => {}
        "VA" => cfg.residual_block_layers.clear(),
        "VB" => {
            cfg.residual_block_layers.clear();
            cfg.joint_stream_residual_blocks = true;
        }
        "VC" => cfg.joint_stream_residual_blocks = true,
        "M1" => {
            cfg.pooling_residual = PoolKind::Maxpool;
            cfg.pooling_joint = PoolKind::Maxpool;
        }
        "M2" => cfg.pooling_joint = PoolKind::Maxpool,
        "M3" => cfg.pooling_residual = PoolKind::Maxpool,
        "layers4" => cfg.residual_block_layers = BTreeSet::from([2, 3, 4, 5]),
        "layers5" => cfg.residual_block_layers = (1..=5).collect(),
        "only_residual" => cfg.fusion = Fusion::ResidualOnly,
        "only_joint" => cfg.fusion = Fusion::JointOnly,
        other => match other.strip_prefix("subset:") {
            Some(subset) => cfg.filter_subset = subset.parse()?,
            None => return Err(Error::unknown("ablation variant", other)),
        },
    }
    Ok(cfg)
}

/// The variant applied to the default configuration.
pub fn ablation_variant(name: &str) -> Result<ModelConfig> {
    ablation_variant_from(&ModelConfig::default(), name)
}
