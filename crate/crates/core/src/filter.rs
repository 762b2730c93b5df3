//! Convolution and procedural-noise helpers shared by the image perturbations.
//!
//! Buffers are interleaved with `channels` values per pixel. All borders use
//! mirror reflection without repeating the edge sample (`d c b | a b c d | c b a`).

use rand::Rng;

/// Maps a possibly out-of-range index into `0..n` by mirror reflection.
pub fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Half-width of a Gaussian kernel truncated at four standard deviations.
pub fn gaussian_radius(sigma: f64) -> usize {
    (4.0 * sigma).ceil().max(1.0) as usize
}

/// Normalized, truncated 1-D Gaussian of length `2 * gaussian_radius(sigma) + 1`.
pub fn gaussian_kernel_1d(sigma: f64) -> Vec<f32> {
    let r = gaussian_radius(sigma) as isize;
    let w: Vec<f64> = (-r..=r)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = w.iter().sum();
    w.iter().map(|v| (v / sum) as f32).collect()
}

/// Separable convolution with the same odd-length kernel along both axes.
pub fn convolve_separable(
    data: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    kernel: &[f32],
) -> Vec<f32> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0f32; data.len()];
    for y in 0..height {
        let row = y * width;
        for x in 0..width {
            for c in 0..channels {
                let mut acc = 0f32;
                for (k, w) in kernel.iter().enumerate() {
                    let sx = reflect(x as isize + k as isize - r, width);
                    acc += w * data[(row + sx) * channels + c];
                }
                tmp[(row + x) * channels + c] = acc;
            }
        }
    }
    let mut out = vec![0f32; data.len()];
    for y in 0..height {
        for x in 0..width {
            for c in 0..channels {
                let mut acc = 0f32;
                for (k, w) in kernel.iter().enumerate() {
                    let sy = reflect(y as isize + k as isize - r, height);
                    acc += w * tmp[(sy * width + x) * channels + c];
                }
                out[(y * width + x) * channels + c] = acc;
            }
        }
    }
    out
}

pub fn gaussian_blur(data: &[f32], width: usize, height: usize, channels: usize, sigma: f64) -> Vec<f32> {
    if sigma <= 0.0 {
        return data.to_vec();
    }
    convolve_separable(data, width, height, channels, &gaussian_kernel_1d(sigma))
}

/// Dense 2-D kernel with odd side length, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2d {
    pub size: usize,
    pub weights: Vec<f32>,
}

impl Kernel2d {
    pub fn sum(&self) -> f64 {
        self.weights.iter().map(|&w| w as f64).sum()
    }
}

pub fn convolve_2d(
    data: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    kernel: &Kernel2d,
) -> Vec<f32> {
    let r = (kernel.size / 2) as isize;
    let taps: Vec<(isize, isize, f32)> = kernel
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(i, &w)| {
            (
                (i % kernel.size) as isize - r,
                (i / kernel.size) as isize - r,
                w,
            )
        })
        .collect();
    let mut out = vec![0f32; data.len()];
    let mut acc = vec![0f32; channels];
    for y in 0..height {
        for x in 0..width {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for &(dx, dy, w) in &taps {
                let sx = reflect(x as isize + dx, width);
                let sy = reflect(y as isize + dy, height);
                let base = (sy * width + sx) * channels;
                for c in 0..channels {
                    acc[c] += w * data[base + c];
                }
            }
            out[(y * width + x) * channels..][..channels].copy_from_slice(&acc);
        }
    }
    out
}

/// One-sided motion trail: tap `i` (0..=2r) samples `i` pixels back along
/// `angle_deg`, weighted by a zero-centred Gaussian of `sigma`.
pub fn motion_taps(radius: f64, sigma: f64, angle_deg: f64) -> Vec<(isize, isize, f32)> {
    let width = (2.0 * radius).round() as usize + 1;
    let (s, c) = angle_deg.to_radians().sin_cos();
    let raw: Vec<f64> = (0..width)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter()
        .enumerate()
        .map(|(i, w)| {
            let dx = -(i as f64 * c).round() as isize;
            let dy = -(i as f64 * s).round() as isize;
            (dx, dy, (w / sum) as f32)
        })
        .collect()
}

pub fn convolve_taps(
    data: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    taps: &[(isize, isize, f32)],
) -> Vec<f32> {
    let mut out = vec![0f32; data.len()];
    for y in 0..height {
        for x in 0..width {
            for &(dx, dy, w) in taps {
                let sx = reflect(x as isize + dx, width);
                let sy = reflect(y as isize + dy, height);
                let src = (sy * width + sx) * channels;
                let dst = (y * width + x) * channels;
                for c in 0..channels {
                    out[dst + c] += w * data[src + c];
                }
            }
        }
    }
    out
}

/// Diamond-square fractal on a toroidal grid, cropped to `width x height`
/// and normalized to [0, 1]. Larger `decay` gives a smoother field.
pub fn plasma_fractal<R: Rng + ?Sized>(width: usize, height: usize, decay: f64, rng: &mut R) -> Vec<f32> {
    let size = width.max(height).max(2).next_power_of_two();
    let mut map = vec![0f64; size * size];
    let idx = |x: usize, y: usize| (y % size) * size + (x % size);
    let mut step = size;
    let mut wibble = 100.0f64;
    while step >= 2 {
        let half = step / 2;
        // squares: centre of every step-sized cell
        for y in (0..size).step_by(step) {
            for x in (0..size).step_by(step) {
                let mean = (map[idx(x, y)]
                    + map[idx(x + step, y)]
                    + map[idx(x, y + step)]
                    + map[idx(x + step, y + step)])
                    / 4.0;
                map[idx(x + half, y + half)] = mean + wibble * rng.random_range(-1.0..1.0);
            }
        }
        // diamonds: edge midpoints
        for y in (0..size).step_by(half) {
            let x0 = if (y / half).is_multiple_of(2) { half } else { 0 };
            for x in (x0..size).step_by(step) {
                let mean = (map[idx(x + size - half, y)]
                    + map[idx(x + half, y)]
                    + map[idx(x, y + size - half)]
                    + map[idx(x, y + half)])
                    / 4.0;
                map[idx(x, y)] = mean + wibble * rng.random_range(-1.0..1.0);
            }
        }
        step /= 2;
        wibble /= decay;
    }
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        out.extend_from_slice(&map[y * size..y * size + width]);
    }
    let (lo, hi) = out
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    out.into_iter()
        .map(|v| if span > 0.0 { ((v - lo) / span) as f32 } else { 0.0 })
        .collect()
}
