//! Builds every ablation variant, runs one forward/backward pass and prints
//! parameter counts and the loss on a random batch.
//!
//! ```text
//! cargo run --release --example ablation_matrix -- [crop]
//! ```

use std::time::Instant;

use cgdetect::cli::smoke_variant;
use cgdetect::model::{ablation_variant_from, ModelConfig, VARIANT_NAMES};
use cgdetect::srm::FilterSubset;

fn main() -> cgdetect::Result<()> {
    let crop: usize = std::env::args().nth(1).map_or(96, |s| s.parse().expect("crop"));
    let base = ModelConfig { crop, ..ModelConfig::default() };
    let mut names: Vec<String> = VARIANT_NAMES.iter().map(|s| s.to_string()).collect();
    names.extend(FilterSubset::ABLATION.iter().map(|s| format!("subset:{s}")));
    println!("{:<22} {:>10} {:>10} {:>8}", "variant", "params", "loss", "ms");
    for name in names {
        let t0 = Instant::now();
        let (params, loss) = smoke_variant(ablation_variant_from(&base, &name)?, 0)?;
        println!("{name:<22} {params:>10} {loss:>10.5} {:>8}", t0.elapsed().as_millis());
    }
    Ok(())
}
