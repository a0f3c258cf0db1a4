//! Generates a small synthetic corpus, splits it per class and streams batches.
//!
//! ```text
//! cargo run --release --example data_pipeline -- [out_dir]
//! ```

use cgdetect::data::{generate_synthetic, open_source, split_manifest, write_splits, BatchIter, Label, Manifest, SyntheticConfig};

fn main() -> cgdetect::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("cgdetect_data").display().to_string());
    let dir = std::path::Path::new(&dir);
    let manifest_path = generate_synthetic(&SyntheticConfig::new(20, 64, 3), dir)?;
    let manifest = Manifest::load(&manifest_path)?;
    println!("{}: {} images ({} cg, {} pg)", manifest_path.display(), manifest.len(), manifest.count(Label::Cg), manifest.count(Label::Pg));

    let splits = split_manifest(&manifest, [3.0, 1.0, 1.0], 0)?;
    for path in write_splits(&splits, &manifest_path)? {
        println!("wrote {}", path.display());
    }
    for (name, m) in ["train", "val", "test"].iter().zip(&splits) {
        println!("{name}: {} cg / {} pg", m.count(Label::Cg), m.count(Label::Pg));
    }

    let source = open_source(&splits[0], 64)?;
    for batch in BatchIter::shuffled(source.as_ref(), 8, 0, 0) {
        let batch = batch?;
        println!("batch {} labels {:?}", batch.x.dims(), batch.labels);
    }
    Ok(())
}
