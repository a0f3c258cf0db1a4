//! Prints the layer table of a model and the stream feature shapes.
//!
//! ```text
//! cargo run --release --example model_summary -- [crop] [width] [fusion]
//! ```

use cgdetect::model::{DualStreamModel, ModelConfig};
use cgdetect::Tensor4;

fn main() -> cgdetect::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let crop = args.first().map_or(224, |s| s.parse().expect("crop"));
    let width_multiplier = args.get(1).map_or(1.0, |s| s.parse().expect("width"));
    let mut cfg = ModelConfig { crop, width_multiplier, ..ModelConfig::default() };
    if let Some(f) = args.get(2) {
        cfg.fusion = f.parse()?;
    }
    let model = DualStreamModel::<f32>::build(cfg, 0)?;
    print!("{}", model.summary_text());
    let x = Tensor4::full([1, 3, crop, crop], 128.0f32);
    for (kind, f) in model.stream_features(&x)? {
        println!("{} stream output: {}", kind.as_str(), f.dims());
    }
    println!("logits: {}", model.infer(&x)?.dims());
    Ok(())
}
