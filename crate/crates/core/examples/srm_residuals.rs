//! Residual energy per SRM kernel family on generated cg-like and pg-like images.
//!
//! ```text
//! cargo run --release --example srm_residuals -- [seed]
//! ```

use cgdetect::data::{render, Label, SyntheticConfig};
use cgdetect::data::crop_rgb;
use cgdetect::srm::{load_bank, FilterSubset};

fn main() -> cgdetect::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let cfg = SyntheticConfig::new(1, 96, seed);
    let bank = load_bank()?;
    println!("bank: {} kernels", bank.len());
    println!("{:<14} {:>6} {:>12} {:>12}", "subset", "size", "cg rms", "pg rms");
    for subset in FilterSubset::ABLATION {
        let mut rms = [0.0; 2];
        for label in Label::ALL {
            let img = crop_rgb::<f64>(&render(&cfg, label, 0), 96).expect("size");
            let r = bank.apply(&img, &subset)?;
            rms[label.index()] = (r.data().iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt();
        }
        println!("{:<14} {:>6} {:>12.4} {:>12.4}", subset.to_string(), bank.members(&subset)?.len(), rms[0], rms[1]);
    }
    Ok(())
}
