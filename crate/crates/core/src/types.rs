//! Shared domain types: poses, trajectories, RGB images and depth maps.

use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel for missing depth, both in memory (meters) and in 16-bit storage.
pub const VOID: f32 = 0.0;

/// A timestamped camera pose in SE(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub timestamp: f64,
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(timestamp: f64, rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            timestamp,
            rotation,
            translation,
        }
    }

    pub fn identity(timestamp: f64) -> Self {
        Self::new(timestamp, UnitQuaternion::identity(), Vector3::zeros())
    }

    /// Builds a pose from raw quaternion components, normalizing them.
    pub fn from_components(timestamp: f64, t: [f64; 3], q_wxyz: [f64; 4]) -> Result<Self> {
        let q = nalgebra::Quaternion::new(q_wxyz[0], q_wxyz[1], q_wxyz[2], q_wxyz[3]);
        let norm = q.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::Parameter(format!(
                "degenerate quaternion at t={timestamp}"
            )));
        }
        // keep components that are already unit so text round trips are exact
        let rotation = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::from_quaternion(q)
        };
        Ok(Self::new(
            timestamp,
            rotation,
            Vector3::new(t[0], t[1], t[2]),
        ))
    }

    pub fn from_rotation_matrix(timestamp: f64, r: &Matrix3<f64>, t: Vector3<f64>) -> Self {
        let rot = Rotation3::from_matrix_unchecked(*r);
        Self::new(timestamp, UnitQuaternion::from_rotation_matrix(&rot), t)
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.translation), self.rotation)
    }
}

/// Ordered poses with strictly increasing timestamps; never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    poses: Vec<Pose>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::InsufficientData("trajectory has no poses".into()));
        }
        if let Some(i) = poses
            .windows(2)
            .position(|w| !(w[1].timestamp > w[0].timestamp))
        {
            return Err(Error::Parameter(format!(
                "timestamps not strictly increasing at pose {} ({} -> {})",
                i + 1,
                poses[i].timestamp,
                poses[i + 1].timestamp
            )));
        }
        Ok(Self { poses })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn into_poses(self) -> Vec<Pose> {
        self.poses
    }
}

/// 8-bit interleaved RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::Parameter(format!(
                "rgb buffer has {} bytes, expected {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn to_working(&self) -> WorkImage {
        WorkImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v as f32 / 255.0).collect(),
        }
    }
}

/// Floating point working form of an RGB image, nominally in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct WorkImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl WorkImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::Parameter(format!(
                "working buffer has {} values, expected {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height * 3],
        }
    }

    pub fn clamp(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Clamps to [0, 1] and rounds to 8 bits.
    pub fn quantize(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| quantize_unit(v)).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len().max(1) as f64
    }
}

pub(crate) fn quantize_unit(v: f32) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Metric depth map in meters; `VOID` marks missing measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Parameter(format!(
                "depth buffer has {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Parameter(format!("invalid depth value {bad}")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, depth: f32) -> Self {
        Self {
            width,
            height,
            data: vec![depth.max(0.0); width * height],
        }
    }

    /// Crate-internal constructor for buffers already known to satisfy the
    /// non-negativity invariant.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn void_count(&self) -> usize {
        self.data.iter().filter(|&&v| v == VOID).count()
    }

    pub fn void_fraction(&self) -> f64 {
        self.void_count() as f64 / self.data.len().max(1) as f64
    }
}

/// Static perturbations hold their severity for the whole stream; dynamic
/// ones vary it from frame to frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Static,
    Dynamic,
}
