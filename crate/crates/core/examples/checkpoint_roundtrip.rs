//! Saves a freshly built model, reloads it and checks both bytes and outputs.
//!
//! ```text
//! cargo run --release --example checkpoint_roundtrip -- [path]
//! ```

use cgdetect::checkpoint::Checkpoint;
use cgdetect::model::{DualStreamModel, ModelConfig};
use cgdetect::Tensor4;

fn main() -> cgdetect::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("roundtrip.ckpt").display().to_string());
    let path = std::path::Path::new(&path);
    let cfg = ModelConfig { crop: 32, width_multiplier: 0.25, ..ModelConfig::default() };
    let model = DualStreamModel::<f32>::build(cfg, 42)?;
    let bytes = model.to_checkpoint().encode()?;
    model.to_checkpoint().save(path)?;

    let restored = DualStreamModel::<f32>::from_checkpoint(&Checkpoint::load(path)?)?;
    let same_bytes = restored.to_checkpoint().encode()? == bytes;
    let x = Tensor4::from_fn([2, 3, 32, 32], |n, c, h, w| ((n * 7 + c * 31 + h * 3 + w * 5) % 256) as f32);
    let diff = model.infer(&x)?.max_abs_diff(&restored.infer(&x)?);
    println!("{}: {} bytes, {} parameters", path.display(), bytes.len(), model.num_params());
    println!("re-encoded bytes identical: {same_bytes}");
    println!("max logit difference: {diff:e}");
    Ok(())
}
