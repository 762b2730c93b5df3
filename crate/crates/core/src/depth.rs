//! Depth-sensor perturbations: additive noise, edge erosion, random missing
//! patches and range clipping. VOID pixels are never resurrected.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::perturbation::{effective_level, PerturbationKind, PerturbationSpec};
use crate::rng::{derive_rng, RngKey};
use crate::severity::{severity_params, DepthKind, ImagingKind, Params, SeverityLevel};
use crate::types::{DepthMap, VOID};

/// Noisy depths are clamped to at least this many meters.
pub const MIN_DEPTH: f32 = 1e-4;

/// Gradient magnitudes at or above this percentile count as edges.
const EDGE_PERCENTILE: f64 = 0.9;

/// Random-missing patch sides, as fractions of the image side.
const PATCH_SIDE: (f64, f64) = (0.02, 0.10);

pub fn depth_gaussian_noise(d: &DepthMap, level: SeverityLevel, key: RngKey) -> DepthMap {
    let Params::DepthGaussianNoise { scale } = severity_params(ImagingKind::Depth(DepthKind::GaussianNoise), level) else {
        unreachable!()
    };
    gaussian_noise_with_scale(d, scale, key)
}

pub fn gaussian_noise_with_scale(d: &DepthMap, scale: f64, key: RngKey) -> DepthMap {
    let normal = Normal::new(0.0f32, scale as f32).expect("finite non-negative scale");
    let mut rng = derive_rng(key);
    let data = d
        .data()
        .iter()
        .map(|&v| {
            let eta = normal.sample(&mut rng);
            if v == VOID {
                VOID
            } else {
                (v + eta).max(MIN_DEPTH)
            }
        })
        .collect();
    DepthMap::from_raw(d.width(), d.height(), data)
}

/// Central-difference gradient magnitude per pixel (one-sided at borders).
pub fn gradient_magnitude(d: &DepthMap) -> Vec<f32> {
    let (w, h) = (d.width(), d.height());
    let mut out = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
            let gx = if xr > xl {
                (d.get(xr, y) - d.get(xl, y)) / (xr - xl) as f32
            } else {
                0.0
            };
            let gy = if yd > yu {
                (d.get(x, yd) - d.get(x, yu)) / (yd - yu) as f32
            } else {
                0.0
            };
            out[y * w + x] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Edge pixels: positive gradient magnitude at or above the 90th percentile.
pub fn detect_edges(d: &DepthMap) -> Vec<bool> {
    let mag = gradient_magnitude(d);
    let mut sorted = mag.clone();
    sorted.sort_by(f32::total_cmp);
    let threshold = if sorted.is_empty() {
        0.0
    } else {
        let idx = ((sorted.len() - 1) as f64 * EDGE_PERCENTILE).round() as usize;
        sorted[idx]
    };
    mag.iter().map(|&m| m > 0.0 && m >= threshold).collect()
}

pub fn depth_edge_erosion(d: &DepthMap, level: SeverityLevel, key: RngKey) -> DepthMap {
    let Params::EdgeErosion { rate } = severity_params(ImagingKind::Depth(DepthKind::EdgeErosion), level) else {
        unreachable!()
    };
    edge_erosion_with_rate(d, rate, key)
}

/// Erases `rate * pixels` valid pixels drawn uniformly from the narrowest
/// band around detected edges that holds at least twice that many.
pub fn edge_erosion_with_rate(d: &DepthMap, rate: f64, key: RngKey) -> DepthMap {
    let (w, h) = (d.width(), d.height());
    let target = (rate * (w * h) as f64).round() as usize;
    let edges = detect_edges(d);
    if target == 0 || !edges.iter().any(|&e| e) {
        return d.clone();
    }

    // multi-source BFS from edge pixels, 8-connected (chessboard distance)
    let mut dist = vec![u32::MAX; w * h];
    let mut queue = VecDeque::new();
    for (i, &e) in edges.iter().enumerate() {
        if e {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    let want = target.saturating_mul(2);
    let mut band: Vec<usize> = Vec::new();
    let mut current = 0u32;
    let mut valid_within = 0usize;
    while let Some(i) = queue.pop_front() {
        if dist[i] > current {
            if valid_within >= want {
                break;
            }
            current = dist[i];
        }
        if d.data()[i] != VOID {
            band.push(i);
            valid_within += 1;
        }
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if dist[j] == u32::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
    }

    let mut rng = derive_rng(key);
    let take = target.min(band.len());
    let mut data = d.data().to_vec();
    for pick in index::sample(&mut rng, band.len(), take) {
        data[band[pick]] = VOID;
    }
    DepthMap::from_raw(w, h, data)
}

pub fn depth_random_missing(d: &DepthMap, level: SeverityLevel, key: RngKey) -> Result<DepthMap> {
    let Params::RandomMissing { rate } = severity_params(ImagingKind::Depth(DepthKind::RandomMissing), level) else {
        unreachable!()
    };
    random_missing_with_rate(d, rate, key)
}

/// Voids random rectangles until the VOID fraction first reaches `rate`.
pub fn random_missing_with_rate(d: &DepthMap, rate: f64, key: RngKey) -> Result<DepthMap> {
    let (w, h) = (d.width(), d.height());
    let n = w * h;
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!("missing rate {rate} outside [0, 1)")));
    }
    if rate == 0.0 {
        return Ok(d.clone());
    }
    if n == 0 || 1.0 / n as f64 > rate {
        return Err(Error::Parameter(format!(
            "missing rate {rate} cannot be reached on a {w}x{h} depth map"
        )));
    }
    let target = (rate * n as f64).ceil() as usize;
    let mut data = d.data().to_vec();
    let mut voids = d.void_count();
    let mut rng = derive_rng(key);
    let side = |len: usize, rng: &mut crate::rng::KeyedRng| {
        let frac: f64 = rng.random_range(PATCH_SIDE.0..=PATCH_SIDE.1);
        ((frac * len as f64).round() as usize).max(1)
    };
    while voids < target {
        let cx = rng.random_range(0..w);
        let cy = rng.random_range(0..h);
        let pw = side(w, &mut rng);
        let ph = side(h, &mut rng);
        let x0 = cx.saturating_sub(pw / 2);
        let y0 = cy.saturating_sub(ph / 2);
        let (x1, y1) = ((x0 + pw).min(w), (y0 + ph).min(h));
        for y in y0..y1 {
            for v in &mut data[y * w + x0..y * w + x1] {
                if *v != VOID {
                    *v = VOID;
                    voids += 1;
                }
            }
        }
    }
    Ok(DepthMap::from_raw(w, h, data))
}

pub fn depth_range_clip(d: &DepthMap, level: SeverityLevel) -> DepthMap {
    let Params::RangeClip { min, max } = severity_params(ImagingKind::Depth(DepthKind::RangeClip), level) else {
        unreachable!()
    };
    range_clip(d, min as f32, max as f32)
}

/// Values outside `[min, max]` become VOID; everything else is untouched.
pub fn range_clip(d: &DepthMap, min: f32, max: f32) -> DepthMap {
    let data = d
        .data()
        .iter()
        .map(|&v| if v < min || v > max { VOID } else { v })
        .collect();
    DepthMap::from_raw(d.width(), d.height(), data)
}

pub fn apply_depth_level(d: &DepthMap, kind: DepthKind, level: SeverityLevel, key: RngKey) -> Result<DepthMap> {
    Ok(match kind {
        DepthKind::GaussianNoise => depth_gaussian_noise(d, level, key),
        DepthKind::EdgeErosion => depth_edge_erosion(d, level, key),
        DepthKind::RandomMissing => depth_random_missing(d, level, key)?,
        DepthKind::RangeClip => depth_range_clip(d, level),
    })
}

/// Applies a depth perturbation spec to one frame, with per-frame level
/// jitter for dynamic specs.
pub fn apply_depth(d: &DepthMap, spec: &PerturbationSpec, key: RngKey) -> Result<DepthMap> {
    match (spec.kind(), spec.level()) {
        (PerturbationKind::Depth(kind), Some(level)) => {
            let level = effective_level(level, spec.mode(), key);
            apply_depth_level(d, kind, level, key)
        }
        (other, _) => Err(Error::Parameter(format!(
            "{other:?} is not a depth imaging perturbation"
        ))),
    }
}
