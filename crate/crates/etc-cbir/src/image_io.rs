//! Raster load/save. PNG is the lossless transport; JPEG decodes but is
//! reported as lossy.

use std::io::Cursor;
use std::path::Path;

use etc_cbir_core::Raster;
use image::{ImageFormat, RgbImage};

use crate::error::{read, write_atomic, Result};

/// A decoded image plus whether its container is lossy.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub raster: Raster,
    pub format: ImageFormat,
    pub lossy: bool,
}

pub fn decode(bytes: &[u8]) -> Result<Decoded> {
    let format = image::guess_format(bytes)?;
    let img = image::load_from_memory_with_format(bytes, format)?;
    // grayscale and alpha inputs both end up as plain 8-bit RGB
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let raster = Raster::new(w as usize, h as usize, rgb.into_raw())?;
    Ok(Decoded {
        raster,
        format,
        lossy: format != ImageFormat::Png,
    })
}

pub fn load(path: &Path) -> Result<Raster> {
    Ok(decode(&read(path)?)?.raster)
}

pub fn encode_png(raster: &Raster) -> Result<Vec<u8>> {
    let img = RgbImage::from_raw(
        raster.width() as u32,
        raster.height() as u32,
        raster.data().to_vec(),
    )
    .expect("raster length is validated on construction");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn save_png(path: &Path, raster: &Raster) -> Result<()> {
    write_atomic(path, &encode_png(raster)?)
}

pub fn file_extension(format: ImageFormat) -> &'static str {
    format.extensions_str().first().copied().unwrap_or("bin")
}
