//! RGB-D stream desynchronization by frame-index shifting.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_rng, RngKey};
use crate::types::Mode;

pub const INTERVAL_PRESETS: [u32; 3] = [5, 10, 20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelayedStream {
    #[default]
    Depth,
    Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesyncSpec {
    pub interval: u32,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub delayed: DelayedStream,
}

impl DesyncSpec {
    pub fn new(interval: u32, mode: Mode) -> Self {
        Self {
            interval,
            mode,
            delayed: DelayedStream::Depth,
        }
    }
}

/// One output frame: which RGB and depth source frames are paired. The pose
/// label stays with index `t` of the undelayed stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub t: usize,
    pub rgb: usize,
    pub depth: usize,
}

impl Pairing {
    pub fn offset(&self) -> isize {
        self.depth as isize - self.rgb as isize
    }
}

/// Pairs index `t` of the leading stream with index `t + d_t` of the delayed
/// stream, `d_t = interval` (static) or `interval + u_t` with `u_t` uniform in
/// {-1, 0, +1} and clamped into range (dynamic). Output length is always
/// `n - interval`.
pub fn desync_pairs(n: usize, spec: &DesyncSpec, key: RngKey) -> Result<Vec<Pairing>> {
    let delta = spec.interval as usize;
    if delta >= n {
        return Err(Error::Parameter(format!(
            "desync interval {delta} must be smaller than the stream length {n}"
        )));
    }
    Ok((0..n - delta)
        .map(|t| {
            let shift = match spec.mode {
                Mode::Static => delta as isize,
                Mode::Dynamic => {
                    let jitter = derive_rng(key.with_frame(t as u64)).random_range(-1i64..=1) as isize;
                    delta as isize + jitter
                }
            };
            let partner = (t as isize + shift).clamp(0, n as isize - 1) as usize;
            match spec.delayed {
                DelayedStream::Depth => Pairing { t, rgb: t, depth: partner },
                DelayedStream::Rgb => Pairing { t, rgb: partner, depth: t },
            }
        })
        .collect())
}

/// Applies [`desync_pairs`] to in-memory streams, returning
/// `(rgb, depth, pose_label_index)` triples.
pub fn desynchronize<R: Clone, D: Clone>(
    rgb: &[R],
    depth: &[D],
    spec: &DesyncSpec,
    key: RngKey,
) -> Result<Vec<(R, D, usize)>> {
    if rgb.len() != depth.len() {
        return Err(Error::Parameter(format!(
            "rgb and depth streams differ in length ({} vs {})",
            rgb.len(),
            depth.len()
        )));
    }
    Ok(desync_pairs(rgb.len(), spec, key)?
        .into_iter()
        .map(|p| (rgb[p.rgb].clone(), depth[p.depth].clone(), p.t))
        .collect())
}
