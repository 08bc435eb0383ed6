//! 8-bit PNG import and export.
//!
//! Export clamps to the unit range, scales to 0..255, and rounds ties to
//! even. Import returns unit-range values, keeping grayscale files as one
//! channel and everything else as three.

use std::path::Path;

use image::{ColorType, DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};
use crate::plane::{ImagePlane, ImageStack};

/// Writes a one- or three-channel stack as an 8-bit PNG.
pub fn write_png(path: &Path, stack: &ImageStack) -> Result<()> {
    let (h, w) = stack.shape();
    match stack.channels() {
        [gray] => {
            let img: ImageBuffer<Luma<u8>, Vec<u8>> =
                ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
                    Luma([quantize(gray[(y as usize, x as usize)])])
                });
            img.save(path)?;
        }
        [r, g, b] => {
            let img: ImageBuffer<Rgb<u8>, Vec<u8>> =
                ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
                    let p = (y as usize, x as usize);
                    Rgb([quantize(r[p]), quantize(g[p]), quantize(b[p])])
                });
            img.save(path)?;
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "png supports 1 or 3 channels, got {}",
                other.len()
            )))
        }
    }
    Ok(())
}

/// Reads a PNG into unit-range floats; grayscale files stay one channel and
/// all other layouts become RGB.
pub fn read_png(path: &Path) -> Result<ImageStack> {
    let img = image::open(path)?;
    if is_luma(&img) {
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        let plane = ImagePlane::from_fn(h as usize, w as usize, |r, c| {
            gray.get_pixel(c as u32, r as u32).0[0] as f64 / 255.0
        });
        Ok(ImageStack::gray(plane))
    } else {
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        let channel = |i: usize| {
            ImagePlane::from_fn(h as usize, w as usize, |r, c| {
                rgb.get_pixel(c as u32, r as u32).0[i] as f64 / 255.0
            })
        };
        ImageStack::new(vec![channel(0), channel(1), channel(2)])
    }
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round_ties_even() as u8
}

fn is_luma(img: &DynamicImage) -> bool {
    matches!(
        img.color(),
        ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16
    )
}
