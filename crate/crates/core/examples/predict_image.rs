//! Scores image files with a checkpoint, or with an untrained model when none is given.
//!
//! ```text
//! cargo run --release --example predict_image -- <image>... [--checkpoint path]
//! ```

use std::time::Instant;

use cgdetect::checkpoint::Checkpoint;
use cgdetect::data::load_and_crop;
use cgdetect::model::{DualStreamModel, ModelConfig};
use cgdetect::train::predict_one;

fn main() -> cgdetect::Result<()> {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    let ck = args.iter().position(|a| a == "--checkpoint").map(|i| {
        let p = args.remove(i + 1);
        args.remove(i);
        p
    });
    let model = match ck {
        Some(p) => DualStreamModel::<f32>::from_checkpoint(&Checkpoint::load(p.as_ref())?)?,
        None => DualStreamModel::<f32>::build(ModelConfig::default(), 0)?,
    };
    let crop = model.config().crop;
    for path in &args {
        let t0 = Instant::now();
        let x = load_and_crop::<f32>(std::path::Path::new(path), crop)?;
        let (label, p) = predict_one(&model, &x)?;
        println!("{path}\t{label}\tp_cg={:.4}\tp_pg={:.4}\t{:.1?}", p[0], p[1], t0.elapsed());
    }
    Ok(())
}
