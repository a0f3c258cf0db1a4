//! Trains a model on generated cg-like / pg-like images and reports test accuracy.
//!
//! ```text
//! cargo run --release --example train_synthetic -- [fusion] [epochs] [seed] [lr] [batch]
//! ```

use std::time::Instant;

use cgdetect::data::{render_all, InMemoryDataset, SyntheticConfig};
use cgdetect::model::{DualStreamModel, Fusion, ModelConfig};
use cgdetect::optim::SgdConfig;
use cgdetect::train::{evaluate, train};

fn main() -> cgdetect::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_owned());
    let fusion: Fusion = arg(0, "concat").parse()?;
    let epochs: usize = arg(1, "5").parse().expect("epochs");
    let seed: u64 = arg(2, "0").parse().expect("seed");
    let lr: f64 = arg(3, "0.01").parse().expect("lr");
    let batch: usize = arg(4, "32").parse().expect("batch");

    let size = 96;
    let t0 = Instant::now();
    let train_set = InMemoryDataset::from_images(&render_all(&SyntheticConfig::new(400, size, seed))?, size)?;
    let test_set = InMemoryDataset::from_images(&render_all(&SyntheticConfig::new(200, size, seed + 1000))?, size)?;
    println!("data ready in {:.1?}", t0.elapsed());

    let config = ModelConfig { fusion, crop: size, width_multiplier: 0.5, ..ModelConfig::default() };
    let mut model = DualStreamModel::<f32>::build(config, seed)?;
    let sgd = SgdConfig { lr0: lr, epochs, batch_size: batch, ..SgdConfig::default() };
    println!("{fusion}: {} parameters", model.num_params());
    train(&mut model, &train_set, Some(&test_set), &sgd, seed, |log, _| {
        println!("epoch {} loss {:.4} test acc {:.3} ({:.1?})", log.epoch, log.train_loss, log.val_acc.unwrap(), t0.elapsed());
        Ok(())
    })?;
    let (metrics, _) = evaluate(&model, &test_set, 64)?;
    println!("final {metrics}");
    Ok(())
}
