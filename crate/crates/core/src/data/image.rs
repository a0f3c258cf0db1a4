//! Image decoding and centre cropping.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor4};

/// Top-left corner of the centred `crop` window, rounding down.
pub fn crop_origin(height: usize, width: usize, crop: usize) -> (usize, usize) {
    ((height - crop) / 2, (width - crop) / 2)
}

/// Centre crop of an RGB8 image into a `(1, 3, crop, crop)` tensor on the 0-255 scale.
pub fn crop_rgb<T: Real>(img: &image::RgbImage, crop: usize) -> Option<Tensor4<T>> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if h < crop || w < crop {
        return None;
    }
    let (top, left) = crop_origin(h, w, crop);
    Some(Tensor4::from_fn([1, 3, crop, crop], |_, c, y, x| {
        T::from_f64_lossy(f64::from(img.get_pixel((left + x) as u32, (top + y) as u32)[c]))
    }))
}

/// Decodes `path` and returns its centre crop, or `Error::Undersized`.
pub fn load_and_crop<T: Real>(path: impl AsRef<Path>, crop: usize) -> Result<Tensor4<T>> {
    let path = path.as_ref();
    let img = image::open(path)
        .map_err(|source| Error::Image { path: path.to_path_buf(), source })?
        .into_rgb8();
    let (width, height) = img.dimensions();
    crop_rgb(&img, crop).ok_or_else(|| Error::Undersized { path: path.to_path_buf(), width, height, crop })
}
