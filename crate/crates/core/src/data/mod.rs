//! Manifests, decoding, splits, metrics, synthetic data and batching.

pub mod batch;
pub mod image;
pub mod manifest;
pub mod metrics;
pub mod split;
pub mod synthetic;

pub use batch::{batch_order, load_batch, open_source, Batch, BatchIter, InMemoryDataset, LazyDataset, SampleSource};
pub use self::image::{crop_origin, crop_rgb, load_and_crop};
pub use manifest::{Label, Manifest, Record};
pub use metrics::{accuracy, Metrics};
pub use split::{largest_remainder, parse_ratios, split_manifest, split_paths, write_splits, SPLIT_NAMES};
pub use synthetic::{generate_synthetic, render, render_all, SyntheticConfig};
