//! Sample sources and deterministic mini-batching.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::image::{crop_rgb, load_and_crop};
use super::manifest::{Label, Manifest, Record};
use crate::error::{Error, Result};
use crate::tensor::Tensor4;

/// Indexed collection of cropped RGB samples.
pub trait SampleSource: Sync {
    fn len(&self) -> usize;
    fn crop(&self) -> usize;
    fn label(&self, i: usize) -> Label;
    fn id(&self, i: usize) -> &str;
    /// Writes sample `i` as `3 * crop * crop` values on the 0-255 scale.
    fn fill(&self, i: usize, out: &mut [f32]) -> Result<()>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn labels(&self) -> Vec<Label> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

/// Fully decoded dataset held in memory.
#[derive(Debug, Clone)]
pub struct InMemoryDataset {
    crop: usize,
    ids: Vec<String>,
    labels: Vec<Label>,
    pixels: Vec<f32>,
}

impl InMemoryDataset {
    /// Decodes every record in parallel. Undersized images are skipped with a warning.
    pub fn from_manifest(m: &Manifest, crop: usize) -> Result<Self> {
        let decoded: Vec<Result<Option<Tensor4<f32>>>> = m
            .records
            .par_iter()
            .map(|r| match load_and_crop(m.resolve(r), crop) {
                Ok(t) => Ok(Some(t)),
                Err(Error::Undersized { path, width, height, .. }) => {
                    log::warn!("skipping {}: {width}x{height} is smaller than crop {crop}", path.display());
                    Ok(None)
                }
                Err(e) => Err(e),
            })
            .collect();
        let mut ds = InMemoryDataset::empty(crop);
        for (r, t) in m.records.iter().zip(decoded) {
            if let Some(t) = t? {
                ds.push(r, t.data());
            }
        }
        ds.ensure_non_empty()
    }

    pub fn from_images(images: &[(String, Label, image::RgbImage)], crop: usize) -> Result<Self> {
        let mut ds = InMemoryDataset::empty(crop);
        for (id, label, img) in images {
            match crop_rgb::<f32>(img, crop) {
                Some(t) => ds.push(&Record { path: id.clone(), label: *label }, t.data()),
                None => log::warn!("skipping {id}: {}x{} is smaller than crop {crop}", img.width(), img.height()),
            }
        }
        ds.ensure_non_empty()
    }

    fn empty(crop: usize) -> Self {
        InMemoryDataset { crop, ids: Vec::new(), labels: Vec::new(), pixels: Vec::new() }
    }

    fn push(&mut self, r: &Record, pixels: &[f32]) {
        self.ids.push(r.path.clone());
        self.labels.push(r.label);
        self.pixels.extend_from_slice(pixels);
    }

    fn ensure_non_empty(self) -> Result<Self> {
        if self.ids.is_empty() {
            return Err(Error::Data(format!("no usable samples at crop {}", self.crop)));
        }
        Ok(self)
    }

    /// Subset with the given sample indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let len = 3 * self.crop * self.crop;
        let mut ds = InMemoryDataset::empty(self.crop);
        for &i in indices {
            ds.ids.push(self.ids[i].clone());
            ds.labels.push(self.labels[i]);
            ds.pixels.extend_from_slice(&self.pixels[i * len..(i + 1) * len]);
        }
        ds
    }
}

impl SampleSource for InMemoryDataset {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn crop(&self) -> usize {
        self.crop
    }

    fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    fn fill(&self, i: usize, out: &mut [f32]) -> Result<()> {
        let len = out.len();
        out.copy_from_slice(&self.pixels[i * len..(i + 1) * len]);
        Ok(())
    }
}

/// Decodes images on demand; only headers are read up front.
#[derive(Debug, Clone)]
pub struct LazyDataset {
    manifest: Manifest,
    crop: usize,
}

impl LazyDataset {
    pub fn from_manifest(m: &Manifest, crop: usize) -> Result<Self> {
        let mut records = Vec::new();
        for r in &m.records {
            let path = m.resolve(r);
            let (w, h) = image::image_dimensions(&path).map_err(|source| Error::Image { path: path.clone(), source })?;
            if (w as usize) < crop || (h as usize) < crop {
                log::warn!("skipping {}: {w}x{h} is smaller than crop {crop}", path.display());
            } else {
                records.push(r.clone());
            }
        }
        if records.is_empty() {
            return Err(Error::Data(format!("no usable samples at crop {crop}")));
        }
        Ok(LazyDataset { manifest: Manifest { root: m.root.clone(), records }, crop })
    }
}

impl SampleSource for LazyDataset {
    fn len(&self) -> usize {
        self.manifest.len()
    }

    fn crop(&self) -> usize {
        self.crop
    }

    fn label(&self, i: usize) -> Label {
        self.manifest.records[i].label
    }

    fn id(&self, i: usize) -> &str {
        &self.manifest.records[i].path
    }

    fn fill(&self, i: usize, out: &mut [f32]) -> Result<()> {
        let t = load_and_crop::<f32>(self.manifest.resolve(&self.manifest.records[i]), self.crop)?;
        out.copy_from_slice(t.data());
        Ok(())
    }
}

/// Datasets up to this many bytes of decoded pixels are held in memory.
pub const PRELOAD_LIMIT_BYTES: usize = 1 << 30;

/// In-memory when the decoded pixels fit in [`PRELOAD_LIMIT_BYTES`], lazy otherwise.
pub fn open_source(m: &Manifest, crop: usize) -> Result<Box<dyn SampleSource>> {
    let bytes = m.len() * 3 * crop * crop * std::mem::size_of::<f32>();
    if bytes <= PRELOAD_LIMIT_BYTES {
        Ok(Box::new(InMemoryDataset::from_manifest(m, crop)?))
    } else {
        Ok(Box::new(LazyDataset::from_manifest(m, crop)?))
    }
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub x: Tensor4<f32>,
    pub labels: Vec<usize>,
    pub indices: Vec<usize>,
}

/// Sample order for one epoch, a pure function of `(seed, epoch)`.
pub fn batch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Gathers the listed samples. Decoding runs in parallel; order follows `indices`.
pub fn load_batch(source: &dyn SampleSource, indices: &[usize]) -> Result<Batch> {
    let crop = source.crop();
    let len = 3 * crop * crop;
    let mut data = vec![0.0f32; indices.len() * len];
    data.par_chunks_mut(len).zip(indices.par_iter()).try_for_each(|(out, &i)| source.fill(i, out))?;
    Ok(Batch {
        x: Tensor4::from_vec([indices.len(), 3, crop, crop], data)?,
        labels: indices.iter().map(|&i| source.label(i).index()).collect(),
        indices: indices.to_vec(),
    })
}

/// Batches in `order`; the last one may be short.
pub struct BatchIter<'a> {
    source: &'a dyn SampleSource,
    order: Vec<usize>,
    batch_size: usize,
    pos: usize,
}

impl<'a> BatchIter<'a> {
    /// Shuffled by `(seed, epoch)`.
    pub fn shuffled(source: &'a dyn SampleSource, batch_size: usize, seed: u64, epoch: usize) -> Self {
        Self::with_order(source, batch_size, batch_order(source.len(), seed, epoch))
    }

    /// Dataset order, for evaluation.
    pub fn sequential(source: &'a dyn SampleSource, batch_size: usize) -> Self {
        Self::with_order(source, batch_size, (0..source.len()).collect())
    }

    pub fn with_order(source: &'a dyn SampleSource, batch_size: usize, order: Vec<usize>) -> Self {
        BatchIter { source, order, batch_size: batch_size.max(1), pos: 0 }
    }

    pub fn num_batches(&self) -> usize {
        self.order.len().div_ceil(self.batch_size)
    }
}

impl Iterator for BatchIter<'_> {
    type Item = Result<Batch>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let batch = load_batch(self.source, &self.order[self.pos..end]);
        self.pos = end;
        Some(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(n: usize) -> InMemoryDataset {
        let images: Vec<_> = (0..n)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Cg } else { Label::Pg };
                (format!("{i}"), label, image::RgbImage::from_pixel(2, 2, image::Rgb([i as u8, 0, 0])))
            })
            .collect();
        InMemoryDataset::from_images(&images, 2).unwrap()
    }

    #[test]
    fn batch_sizes_keep_partial_tail() {
        let ds = tiny(130);
        let sizes: Vec<usize> = BatchIter::shuffled(&ds, 64, 1, 0).map(|b| b.unwrap().labels.len()).collect();
        assert_eq!(sizes, vec![64, 64, 2]);
    }

    #[test]
    fn epoch_orders() {
        assert_eq!(batch_order(50, 3, 0), batch_order(50, 3, 0));
        assert_ne!(batch_order(50, 3, 0), batch_order(50, 3, 1));
        let mut o = batch_order(50, 3, 1);
        o.sort_unstable();
        assert_eq!(o, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn batch_content_follows_indices() {
        let ds = tiny(6);
        let b = load_batch(&ds, &[5, 2]).unwrap();
        assert_eq!(b.x.at(0, 0, 1, 1), 5.0);
        assert_eq!(b.x.at(1, 0, 0, 0), 2.0);
        assert_eq!(b.labels, vec![1, 0]);
        assert_eq!(ds.select(&[3]).id(0), "3");
    }
}
