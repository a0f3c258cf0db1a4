//! Dual-stream CG/PG classifier.

mod ablation;
mod config;
mod network;

pub use ablation::{ablation_variant, ablation_variant_from, VARIANT_NAMES};
pub use config::{Fusion, ModelConfig, PoolKind, MIDDLE_LAYERS, STREAM_DEPTH, STREAM_REDUCTION};
pub use network::{DualStreamModel, LayerSummary, StreamKind, NUM_CLASSES};
