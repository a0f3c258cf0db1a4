//! Synthetic cg-like / pg-like images that differ only in high-frequency noise.
//!
//! Both classes start from a smooth random base: a 6x6 grid of random colours
//! bilinearly upsampled to the image size, plus Gaussian noise. The cg-like
//! class is then blurred with a 3x3 box filter, which removes most of the
//! noise residual that the SRM kernels respond to. Image `i` of each class
//! shares the same base, so content carries no label information.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::manifest::{Label, Manifest, Record};
use crate::error::{Error, Result};

pub const GRID: usize = 6;
pub const DEFAULT_NOISE_SIGMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub count_per_class: usize,
    pub size: usize,
    pub seed: u64,
    pub noise_sigma: f64,
}

impl SyntheticConfig {
    pub fn new(count_per_class: usize, size: usize, seed: u64) -> Self {
        SyntheticConfig { count_per_class, size, seed, noise_sigma: DEFAULT_NOISE_SIGMA }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.size % 32 != 0 {
            return Err(Error::invalid(format!("synthetic size must be a positive multiple of 32, got {}", self.size)));
        }
        if self.count_per_class == 0 {
            return Err(Error::invalid("synthetic count_per_class must be positive"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Independent stream per image so images can be rendered in any order.
/// The base depends only on the index; the noise also on the label.
fn image_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Smooth base, channel-major `3 * size * size` floats on the 0-255 scale.
pub fn smooth_base(rng: &mut impl Rng, size: usize) -> Vec<f64> {
    let mut out = vec![0.0; 3 * size * size];
    let scale = (GRID - 1) as f64 / (size.max(2) - 1) as f64;
    for plane in out.chunks_mut(size * size) {
        let grid: Vec<f64> = (0..GRID * GRID).map(|_| rng.gen_range(32.0..224.0)).collect();
        for y in 0..size {
            let gy = y as f64 * scale;
            let y0 = (gy.floor() as usize).min(GRID - 2);
            let fy = gy - y0 as f64;
            for x in 0..size {
                let gx = x as f64 * scale;
                let x0 = (gx.floor() as usize).min(GRID - 2);
                let fx = gx - x0 as f64;
                let g = |r: usize, c: usize| grid[r * GRID + c];
                let top = g(y0, x0) * (1.0 - fx) + g(y0, x0 + 1) * fx;
                let bottom = g(y0 + 1, x0) * (1.0 - fx) + g(y0 + 1, x0 + 1) * fx;
                plane[y * size + x] = top * (1.0 - fy) + bottom * fy;
            }
        }
    }
    out
}

/// 3x3 mean filter with edge replication, applied per plane.
pub fn box_filter(data: &[f64], size: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    let last = size as isize - 1;
    for (src, dst) in data.chunks(size * size).zip(out.chunks_mut(size * size)) {
        for y in 0..size as isize {
            for x in 0..size as isize {
                let mut acc = 0.0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (sy, sx) = ((y + dy).clamp(0, last), (x + dx).clamp(0, last));
                        acc += src[(sy * size as isize + sx) as usize];
                    }
                }
                dst[(y * size as isize + x) as usize] = acc / 9.0;
            }
        }
    }
    out
}

/// The smooth base of image `index`, before noise.
pub fn base_for(cfg: &SyntheticConfig, index: usize) -> Vec<f64> {
    smooth_base(&mut image_rng(cfg.seed, index as u64), cfg.size)
}

/// Renders image `index` of class `label`. Images with the same index share
/// their smooth base across classes.
pub fn render(cfg: &SyntheticConfig, label: Label, index: usize) -> image::RgbImage {
    let size = cfg.size;
    let mut data = base_for(cfg, index);
    let mut rng = image_rng(cfg.seed, (1 + label.index() as u64) << 40 | index as u64);
    if cfg.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
        for v in &mut data {
            *v += noise.sample(&mut rng);
        }
    }
    if label == Label::Cg {
        data = box_filter(&data, size);
    }
    let plane = size * size;
    image::RgbImage::from_fn(size as u32, size as u32, |x, y| {
        let i = y as usize * size + x as usize;
        image::Rgb([0, 1, 2].map(|c| data[c * plane + i].round().clamp(0.0, 255.0) as u8))
    })
}

pub fn relative_path(label: Label, index: usize) -> String {
    format!("{label}/{index:05}.png")
}

/// Renders every image in memory, cg first, each class in index order.
pub fn render_all(cfg: &SyntheticConfig) -> Result<Vec<(String, Label, image::RgbImage)>> {
    cfg.validate()?;
    let jobs: Vec<(Label, usize)> =
        Label::ALL.iter().flat_map(|&l| (0..cfg.count_per_class).map(move |i| (l, i))).collect();
    Ok(jobs.into_par_iter().map(|(l, i)| (relative_path(l, i), l, render(cfg, l, i))).collect())
}

/// Writes `cg/`, `pg/` and `manifest.txt` under `dir`; returns the manifest path.
pub fn generate_synthetic(cfg: &SyntheticConfig, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    for label in Label::ALL {
        let sub = dir.join(label.as_str());
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    }
    let images = render_all(cfg)?;
    images.par_iter().try_for_each(|(rel, _, img)| {
        let path = dir.join(rel);
        img.save_with_format(&path, image::ImageFormat::Png)
            .map_err(|source| Error::Image { path, source })
    })?;
    let records = images.into_iter().map(|(path, label, _)| Record { path, label }).collect();
    let manifest = Manifest::new(dir, records)?;
    let path = dir.join("manifest.txt");
    manifest.write(&path)?;
    Ok(path)
}
