use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::{self, Kernel2d};
use crate::types::WorkImage;

fn check_kernel(img: &WorkImage, size: usize, what: &str) -> Result<()> {
    let limit = img.width.min(img.height);
    if size >= limit {
        return Err(Error::Parameter(format!(
            "{what} kernel of size {size} does not fit a {}x{} image",
            img.width, img.height
        )));
    }
    Ok(())
}

pub fn gaussian(img: &WorkImage, sigma: f64) -> Result<WorkImage> {
    check_kernel(img, 2 * filter::gaussian_radius(sigma) + 1, "gaussian blur")?;
    Ok(WorkImage {
        width: img.width,
        height: img.height,
        data: filter::gaussian_blur(&img.data, img.width, img.height, 3, sigma),
    })
}

/// Flat disc of `radius` smoothed by a small Gaussian to soften aliasing.
pub fn defocus_kernel(radius: f64, alias_sigma: f64) -> Kernel2d {
    let disc_r = radius.ceil() as isize;
    let pad = if alias_sigma > 0.0 {
        filter::gaussian_radius(alias_sigma) as isize
    } else {
        0
    };
    let half = disc_r + pad;
    let size = (2 * half + 1) as usize;
    let mut disc = vec![0f32; size * size];
    for y in -half..=half {
        for x in -half..=half {
            if ((x * x + y * y) as f64) <= radius * radius {
                disc[((y + half) as usize) * size + (x + half) as usize] = 1.0;
            }
        }
    }
    let smoothed = if alias_sigma > 0.0 {
        // zero padding: the disc sits well inside the grid
        let k = filter::gaussian_kernel_1d(alias_sigma);
        let kr = (k.len() / 2) as isize;
        let pass = |src: &[f32], horizontal: bool| {
            let mut dst = vec![0f32; src.len()];
            for y in 0..size as isize {
                for x in 0..size as isize {
                    let mut acc = 0f32;
                    for (i, w) in k.iter().enumerate() {
                        let o = i as isize - kr;
                        let (sx, sy) = if horizontal { (x + o, y) } else { (x, y + o) };
                        if (0..size as isize).contains(&sx) && (0..size as isize).contains(&sy) {
                            acc += w * src[sy as usize * size + sx as usize];
                        }
                    }
                    dst[y as usize * size + x as usize] = acc;
                }
            }
            dst
        };
        pass(&pass(&disc, true), false)
    } else {
        disc
    };
    let sum: f32 = smoothed.iter().sum();
    Kernel2d {
        size,
        weights: smoothed.into_iter().map(|w| w / sum).collect(),
    }
}

pub fn defocus(img: &WorkImage, radius: f64, alias_sigma: f64) -> Result<WorkImage> {
    let kernel = defocus_kernel(radius, alias_sigma);
    check_kernel(img, kernel.size, "defocus blur")?;
    Ok(WorkImage {
        width: img.width,
        height: img.height,
        data: filter::convolve_2d(&img.data, img.width, img.height, 3, &kernel),
    })
}

/// Linear motion kernel at a random angle in [-45, 45) degrees.
pub fn motion<R: Rng + ?Sized>(img: &WorkImage, radius: f64, sigma: f64, rng: &mut R) -> Result<WorkImage> {
    let angle: f64 = rng.random_range(-45.0..45.0);
    motion_at_angle(img, radius, sigma, angle)
}

pub fn motion_at_angle(img: &WorkImage, radius: f64, sigma: f64, angle_deg: f64) -> Result<WorkImage> {
    let taps = filter::motion_taps(radius, sigma, angle_deg);
    check_kernel(img, taps.len(), "motion blur")?;
    Ok(WorkImage {
        width: img.width,
        height: img.height,
        data: filter::convolve_taps(&img.data, img.width, img.height, 3, &taps),
    })
}

/// Blur, shuffle pixels locally to mimic textured glass, blur again.
pub fn glass<R: Rng + ?Sized>(
    img: &WorkImage,
    sigma: f64,
    max_delta: usize,
    iterations: usize,
    rng: &mut R,
) -> Result<WorkImage> {
    let (w, h) = (img.width, img.height);
    check_kernel(img, (2 * filter::gaussian_radius(sigma) + 1).max(2 * max_delta + 1), "glass blur")?;
    let mut data = filter::gaussian_blur(&img.data, w, h, 3, sigma);
    let d = max_delta as i64;
    if d > 0 {
        for _ in 0..iterations {
            for y in ((d + 1)..=(h as i64 - d)).rev() {
                for x in ((d + 1)..=(w as i64 - d)).rev() {
                    let dx = rng.random_range(-d..d);
                    let dy = rng.random_range(-d..d);
                    let (y0, x0) = (y as usize - 1, x as usize - 1);
                    let (y1, x1) = ((y - 1 + dy) as usize, (x - 1 + dx) as usize);
                    let a = (y0 * w + x0) * 3;
                    let b = (y1 * w + x1) * 3;
                    for c in 0..3 {
                        data.swap(a + c, b + c);
                    }
                }
            }
        }
    }
    Ok(WorkImage {
        width: w,
        height: h,
        data: filter::gaussian_blur(&data, w, h, 3, sigma),
    })
}
