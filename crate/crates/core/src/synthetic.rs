//! Procedural RGB-D sequences used as test fixtures.

use crate::dataset_io::Sequence;
use crate::motion::{smooth_trajectory, DEFAULT_FRAME_RATE};
use crate::types::{DepthMap, RgbImage};

pub const FIXTURE_FRAMES: usize = 24;
pub const FIXTURE_WIDTH: usize = 96;
pub const FIXTURE_HEIGHT: usize = 72;

/// A textured scene drifting two pixels per frame: colour gradients, a
/// checkerboard and a disc over a sloped floor with a box in front.
pub fn synthetic_sequence(frames: usize, width: usize, height: usize) -> Sequence {
    let rgb = (0..frames).map(|i| synthetic_rgb(i, width, height)).collect();
    let depth = (0..frames).map(|i| synthetic_depth(i, width, height)).collect();
    Sequence {
        rgb,
        depth,
        trajectory: smooth_trajectory(frames, DEFAULT_FRAME_RATE),
    }
}

pub fn fixture_sequence() -> Sequence {
    synthetic_sequence(FIXTURE_FRAMES, FIXTURE_WIDTH, FIXTURE_HEIGHT)
}

fn synthetic_rgb(frame: usize, width: usize, height: usize) -> RgbImage {
    let shift = 2 * frame;
    let (cx, cy, r) = (width as f64 * 0.65, height as f64 * 0.4, height as f64 * 0.18);
    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let sx = x + shift;
            let checker = ((sx / 8) + (y / 8)).is_multiple_of(2);
            let mut px = [
                (40 + (sx * 160 / width.max(1)) % 160) as u8,
                (60 + y * 150 / height.max(1)) as u8,
                if checker { 200 } else { 70 },
            ];
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= r * r {
                px = [230, 200, 40];
            }
            data.extend_from_slice(&px);
        }
    }
    RgbImage::new(width, height, data).expect("dimensions match")
}

fn synthetic_depth(frame: usize, width: usize, height: usize) -> DepthMap {
    let shift = 2 * frame;
    let (x0, x1) = (width / 5 + shift % (width / 2).max(1), width / 5 + shift % (width / 2).max(1) + width / 4);
    let (y0, y1) = (height / 3, 2 * height / 3);
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let floor = 4.5 - 3.0 * y as f32 / height.max(1) as f32;
            let d = if (x0..x1).contains(&x) && (y0..y1).contains(&y) { 1.2 } else { floor };
            data.push(d);
        }
    }
    DepthMap::new(width, height, data).expect("dimensions match")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_has_expected_shape() {
        let seq = fixture_sequence();
        assert_eq!(seq.rgb.len(), FIXTURE_FRAMES);
        assert_eq!(seq.depth[0].width(), FIXTURE_WIDTH);
        assert_eq!(seq.trajectory.len(), FIXTURE_FRAMES);
        assert_ne!(seq.rgb[0], seq.rgb[1]);
        assert_eq!(seq.depth[0].void_count(), 0);
    }
}
