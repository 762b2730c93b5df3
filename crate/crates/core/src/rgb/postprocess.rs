use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};

use crate::error::{Error, Result};
use crate::types::{RgbImage, WorkImage};

pub fn brightness(img: &mut WorkImage, offset: f64) {
    let offset = offset as f32;
    for v in &mut img.data {
        *v += offset;
    }
}

/// `beta * (I - J) + J` about the image mean `J`.
pub fn contrast(img: &mut WorkImage, beta: f64) {
    let mean = img.mean() as f32;
    let beta = beta as f32;
    for v in &mut img.data {
        *v = beta * (*v - mean) + mean;
    }
}

/// Round trip through a baseline JPEG encoder at `quality`.
pub fn jpeg(img: &RgbImage, quality: u8) -> Result<RgbImage> {
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality)
        .encode(
            img.data(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::image("<jpeg encode>", e))?;
    let decoded = image::load(Cursor::new(buf), ImageFormat::Jpeg)
        .map_err(|e| Error::image("<jpeg decode>", e))?
        .to_rgb8();
    RgbImage::new(img.width(), img.height(), decoded.into_raw())
}

/// Replaces each pixel by the mean of its block, where blocks tile the
/// image into `round(factor * side)` cells per axis.
pub fn pixelate(img: &mut WorkImage, factor: f64) {
    let (w, h) = (img.width, img.height);
    let cols = ((w as f64 * factor).round() as usize).clamp(1, w);
    let rows = ((h as f64 * factor).round() as usize).clamp(1, h);
    let cell_x: Vec<usize> = (0..w).map(|x| x * cols / w).collect();
    let cell_y: Vec<usize> = (0..h).map(|y| y * rows / h).collect();
    let mut sums = vec![0f64; cols * rows * 3];
    let mut counts = vec![0usize; cols * rows];
    for y in 0..h {
        for x in 0..w {
            let cell = cell_y[y] * cols + cell_x[x];
            counts[cell] += 1;
            for c in 0..3 {
                sums[cell * 3 + c] += img.data[(y * w + x) * 3 + c] as f64;
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let cell = cell_y[y] * cols + cell_x[x];
            for c in 0..3 {
                img.data[(y * w + x) * 3 + c] = (sums[cell * 3 + c] / counts[cell] as f64) as f32;
            }
        }
    }
}
