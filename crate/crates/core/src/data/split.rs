//! Stratified, seeded train/val/test splitting.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::manifest::{Label, Manifest};
use crate::error::{Error, Result};

pub const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

/// Splits `total` items proportionally to `ratios` with largest-remainder rounding.
/// Ties in the remainder go to the earlier split.
pub fn largest_remainder(total: usize, ratios: &[f64]) -> Vec<usize> {
    let sum: f64 = ratios.iter().sum();
    let exact: Vec<f64> = ratios.iter().map(|r| total as f64 * r / sum).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let short = total - sizes.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        sizes[i] += 1;
    }
    sizes
}

/// Shuffles each class with `seed` and cuts it by `ratios`. Records keep
/// their manifest order inside each split.
pub fn split_manifest(m: &Manifest, ratios: [f64; 3], seed: u64) -> Result<[Manifest; 3]> {
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::invalid(format!("split ratios must be positive, got {ratios:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned: [Vec<usize>; 3] = Default::default();
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..m.len()).filter(|&i| m.records[i].label == label).collect();
        if idx.is_empty() {
            return Err(Error::Data(format!("cannot stratify: no `{label}` records")));
        }
        idx.shuffle(&mut rng);
        let sizes = largest_remainder(idx.len(), &ratios);
        let mut rest = idx.as_slice();
        for (part, size) in assigned.iter_mut().zip(sizes) {
            let (head, tail) = rest.split_at(size);
            part.extend_from_slice(head);
            rest = tail;
        }
    }
    let build = |mut idx: Vec<usize>| {
        idx.sort_unstable();
        Manifest { root: m.root.clone(), records: idx.into_iter().map(|i| m.records[i].clone()).collect() }
    };
    let [a, b, c] = assigned;
    Ok([build(a), build(b), build(c)])
}

/// `<base>.train`, `<base>.val`, `<base>.test`.
pub fn split_paths(base: &Path) -> [PathBuf; 3] {
    SPLIT_NAMES.map(|s| {
        let mut p = base.as_os_str().to_owned();
        p.push(".");
        p.push(s);
        PathBuf::from(p)
    })
}

/// Writes the three splits next to `base`. Paths stay relative to the
/// original root, so the output must live in the same directory.
pub fn write_splits(splits: &[Manifest; 3], base: &Path) -> Result<[PathBuf; 3]> {
    let paths = split_paths(base);
    for (m, p) in splits.iter().zip(&paths) {
        m.write(p)?;
    }
    Ok(paths)
}

pub fn parse_ratios(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::invalid(format!("split ratios must look like `10:3:4`, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| bad())?;
    }
    Ok(out)
}
