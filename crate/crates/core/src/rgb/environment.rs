//! Weather and lens-contamination effects, all composed by alpha blending a
//! procedurally generated layer over the image.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::filter;
use crate::severity::{SnowParams, SpatterParams};
use crate::types::WorkImage;

/// Gray level the fog layer converges to at full weight.
pub const FOG_GRAY: f32 = 0.8;

const FROST_TINT: [f32; 3] = [0.92, 0.95, 1.0];
const MUD: [f32; 3] = [63.0 / 255.0, 42.0 / 255.0, 20.0 / 255.0];

fn luma(px: &[f32]) -> f32 {
    0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]
}

/// Bilinear zoom about the image centre; `factor > 1` magnifies.
fn zoom_centre(src: &[f32], width: usize, height: usize, factor: f64) -> Vec<f32> {
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let mut out = vec![0f32; src.len()];
    for y in 0..height {
        for x in 0..width {
            let sx = ((x as f64 - cx) / factor + cx).clamp(0.0, width as f64 - 1.0);
            let sy = ((y as f64 - cy) / factor + cy).clamp(0.0, height as f64 - 1.0);
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(width - 1), (y0 + 1).min(height - 1));
            let (fx, fy) = ((sx - x0 as f64) as f32, (sy - y0 as f64) as f32);
            let top = src[y0 * width + x0] * (1.0 - fx) + src[y0 * width + x1] * fx;
            let bottom = src[y1 * width + x0] * (1.0 - fx) + src[y1 * width + x1] * fx;
            out[y * width + x] = top * (1.0 - fy) + bottom * fy;
        }
    }
    out
}

/// Snow layer pipeline: Gaussian field, zoom by `scale`, zero everything
/// below `threshold`, streak it with a motion blur, then add the streaks (and
/// their 180 degree rotation) over a partially whitened image.
pub fn snow<R: Rng + ?Sized>(img: &WorkImage, p: &SnowParams, rng: &mut R) -> WorkImage {
    let (w, h) = (img.width, img.height);
    let normal = Normal::new(p.mean as f32, p.std as f32).expect("valid snow field");
    let field: Vec<f32> = (0..w * h).map(|_| normal.sample(rng)).collect();
    let mut layer = zoom_centre(&field, w, h, p.scale);
    for v in &mut layer {
        *v = if *v < p.threshold as f32 { 0.0 } else { v.clamp(0.0, 1.0) };
    }
    let angle: f64 = rng.random_range(-135.0..-45.0);
    let taps = filter::motion_taps(p.blur_radius, p.blur_sigma, angle);
    let layer = filter::convolve_taps(&layer, w, h, 1, &taps);

    let blend = p.blend as f32;
    let mut out = img.clone();
    for (i, px) in out.data.chunks_exact_mut(3).enumerate() {
        let lifted = luma(px) * 1.5 + 0.5;
        let flake = layer[i] + layer[w * h - 1 - i];
        for v in px.iter_mut() {
            *v = blend * *v + (1.0 - blend) * v.max(lifted) + flake;
        }
    }
    out.clamp();
    out
}

/// Procedural frost texture in [0, 1]: ridged plasma for crystal veins plus a
/// finer grain layer.
pub fn frost_texture<R: Rng + ?Sized>(width: usize, height: usize, rng: &mut R) -> Vec<f32> {
    let veins = filter::plasma_fractal(width, height, 1.6, rng);
    let grain = filter::plasma_fractal(width, height, 1.2, rng);
    veins
        .iter()
        .zip(&grain)
        .map(|(&v, &g)| {
            let ridge = 1.0 - (2.0 * v - 1.0).abs();
            (0.6 * ridge.powi(3) + 0.4 * g).clamp(0.0, 1.0)
        })
        .collect()
}

/// `intensity * I + texture * frost`.
pub fn frost<R: Rng + ?Sized>(img: &WorkImage, intensity: f64, texture: f64, rng: &mut R) -> WorkImage {
    let tex = frost_texture(img.width, img.height, rng);
    let (a, b) = (intensity as f32, texture as f32);
    let mut out = img.clone();
    for (px, &t) in out.data.chunks_exact_mut(3).zip(&tex) {
        for (v, tint) in px.iter_mut().zip(FROST_TINT) {
            *v = a * *v + b * t * tint;
        }
    }
    out.clamp();
    out
}

/// Per-pixel fog weight `thickness * p / (1 + thickness)` where `p` is a
/// plasma field whose smoothness sets the fractal decay.
pub fn fog_weights<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    thickness: f64,
    smoothness: f64,
    rng: &mut R,
) -> Vec<f32> {
    let field = filter::plasma_fractal(width, height, smoothness.max(1.0 + 1e-6), rng);
    let k = (thickness / (1.0 + thickness)) as f32;
    field.into_iter().map(|p| k * p).collect()
}

/// `(1 - w) * I + w * gray` with spatially varying weight `w`.
pub fn fog<R: Rng + ?Sized>(img: &WorkImage, thickness: f64, smoothness: f64, rng: &mut R) -> WorkImage {
    let weights = fog_weights(img.width, img.height, thickness, smoothness, rng);
    let mut out = img.clone();
    for (px, &w) in out.data.chunks_exact_mut(3).zip(&weights) {
        if w == 0.0 {
            continue;
        }
        for v in px.iter_mut() {
            *v = (1.0 - w) * *v + w * FOG_GRAY;
        }
    }
    out.clamp();
    out
}

/// Binary spatter mask: a smoothed Gaussian field thresholded at
/// `threshold`; 1 marks occupied pixels.
pub fn spatter_mask<R: Rng + ?Sized>(width: usize, height: usize, p: &SpatterParams, rng: &mut R) -> Vec<f32> {
    let normal = Normal::new(p.mean as f32, p.std as f32).expect("valid spatter field");
    let field: Vec<f32> = (0..width * height).map(|_| normal.sample(rng)).collect();
    let smooth = filter::gaussian_blur(&field, width, height, 1, p.sigma);
    smooth
        .into_iter()
        .map(|v| if v >= p.threshold as f32 { 1.0 } else { 0.0 })
        .collect()
}

/// Dark droplets (complexity 0) or mud (complexity 1) composited through the
/// hard mask; pixels outside the mask are left untouched.
pub fn spatter<R: Rng + ?Sized>(img: &WorkImage, p: &SpatterParams, rng: &mut R) -> WorkImage {
    let (w, h) = (img.width, img.height);
    let mask = spatter_mask(w, h, p, rng);
    let soft = filter::gaussian_blur(&mask, w, h, 1, p.scale);
    let opacity = if p.complexity == 0 { 0.6 } else { 1.0 };
    let mut out = img.clone();
    for (i, px) in out.data.chunks_exact_mut(3).enumerate() {
        if mask[i] == 0.0 {
            continue;
        }
        let alpha = opacity * soft[i].clamp(0.0, 1.0);
        for (c, v) in px.iter_mut().enumerate() {
            let layer = if p.complexity == 0 { 0.35 * *v } else { MUD[c] };
            *v = (1.0 - alpha) * *v + alpha * layer;
        }
    }
    out.clamp();
    out
}
