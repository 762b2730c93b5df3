//! Trajectory-level perturbations: per-frame pose deviations, faster motion
//! by temporal downsampling, and the resulting motion statistics.

use nalgebra::{UnitQuaternion, Vector3};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_rng, RngKey};
use crate::types::{Pose, Trajectory};

/// Default frame rate for motion statistics, in Hz.
pub const DEFAULT_FRAME_RATE: f64 = 20.0;

/// Benchmark rotation deviation stds, degrees per axis.
pub const ROTATION_STD_PRESETS: [f64; 4] = [0.0, 1.0, 3.0, 5.0];
/// Benchmark translation deviation stds, meters per axis.
pub const TRANSLATION_STD_PRESETS: [f64; 4] = [0.0, 0.0125, 0.025, 0.05];
/// Faster-motion downsampling ratios.
pub const DOWNSAMPLE_PRESETS: [usize; 3] = [2, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationSpec {
    pub rotation_std_deg: f64,
    pub translation_std_m: f64,
}

impl DeviationSpec {
    pub fn new(rotation_std_deg: f64, translation_std_m: f64) -> Result<Self> {
        let spec = Self {
            rotation_std_deg,
            translation_std_m,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rotation std", self.rotation_std_deg),
            ("translation std", self.translation_std_m),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.rotation_std_deg == 0.0 && self.translation_std_m == 0.0
    }
}

/// Rotation from per-axis angles (radians) composed X, then Y, then Z:
/// `R = Rx(ax) * Ry(ay) * Rz(az)`.
pub fn euler_xyz(ax: f64, ay: f64, az: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::x_axis(), ax)
        * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), ay)
        * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), az)
}

/// Perturbs every pose independently: `R' = R * dR`, `t' = t + dt`.
///
/// Pose `i` draws from the stream keyed by frame `i`. Each frame consumes
/// three rotation draws and then three translation draws, all standard
/// normals scaled by the configured stds.
pub fn perturb_trajectory(traj: &Trajectory, spec: &DeviationSpec, key: RngKey) -> Trajectory {
    if spec.is_identity() {
        return traj.clone();
    }
    let rot_std = spec.rotation_std_deg.to_radians();
    let poses = traj
        .poses()
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            let mut rng = derive_rng(key.with_frame(i as u64));
            let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
            let angles = [z(), z(), z()];
            let shift = [z(), z(), z()];
            let mut out = *pose;
            if rot_std > 0.0 {
                let delta = euler_xyz(angles[0] * rot_std, angles[1] * rot_std, angles[2] * rot_std);
                out.rotation = UnitQuaternion::new_normalize((pose.rotation * delta).into_inner());
            }
            if spec.translation_std_m > 0.0 {
                out.translation += Vector3::from(shift) * spec.translation_std_m;
            }
            out
        })
        .collect();
    Trajectory::new(poses).expect("timestamps are preserved")
}

/// Keeps items `0, r, 2r, ...`; output length is `ceil(n / r)`.
pub fn downsample_stream<T: Clone>(frames: &[T], ratio: usize) -> Result<Vec<T>> {
    Ok(downsample_indices(frames.len(), ratio)?
        .into_iter()
        .map(|i| frames[i].clone())
        .collect())
}

pub fn downsample_indices(len: usize, ratio: usize) -> Result<Vec<usize>> {
    if ratio == 0 {
        return Err(Error::Parameter("downsample ratio must be >= 1".into()));
    }
    Ok((0..len).step_by(ratio).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotionStats {
    pub frame_rate: f64,
    /// m/s, one per consecutive pose pair
    pub translation_speed: Vec<f64>,
    /// m/s^2
    pub translation_acceleration: Vec<f64>,
    /// deg/s
    pub rotation_speed: Vec<f64>,
    /// deg/s^2
    pub rotation_acceleration: Vec<f64>,
    pub mean_translation_speed: f64,
    pub mean_translation_acceleration: f64,
    pub mean_rotation_speed: f64,
    pub mean_rotation_acceleration: f64,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Geodesic angle between two rotations, in radians.
pub fn rotation_angle(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    a.rotation_to(b).angle()
}

/// Speeds from consecutive poses at a fixed frame rate; accelerations are
/// first differences of speeds times the frame rate.
pub fn motion_statistics(traj: &Trajectory, frame_rate: f64) -> Result<MotionStats> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "motion statistics need at least 2 poses, got {}",
            traj.len()
        )));
    }
    if !(frame_rate.is_finite() && frame_rate > 0.0) {
        return Err(Error::Parameter(format!("frame rate must be positive, got {frame_rate}")));
    }
    let poses = traj.poses();
    let translation_speed: Vec<f64> = poses
        .windows(2)
        .map(|w| (w[1].translation - w[0].translation).norm() * frame_rate)
        .collect();
    let rotation_speed: Vec<f64> = poses
        .windows(2)
        .map(|w| rotation_angle(&w[0].rotation, &w[1].rotation).to_degrees() * frame_rate)
        .collect();
    let diff = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| (w[1] - w[0]) * frame_rate).collect() };
    let translation_acceleration = diff(&translation_speed);
    let rotation_acceleration = diff(&rotation_speed);
    Ok(MotionStats {
        frame_rate,
        mean_translation_speed: mean(&translation_speed),
        mean_translation_acceleration: mean(&translation_acceleration),
        mean_rotation_speed: mean(&rotation_speed),
        mean_rotation_acceleration: mean(&rotation_acceleration),
        translation_speed,
        translation_acceleration,
        rotation_speed,
        rotation_acceleration,
    })
}

/// Smooth reference trajectory: constant-speed arc with a slow yaw, sampled at
/// `frame_rate`.
pub fn smooth_trajectory(n: usize, frame_rate: f64) -> Trajectory {
    let poses = (0..n)
        .map(|i| {
            let t = i as f64 / frame_rate;
            let theta = 0.2 * t;
            Pose::new(
                t,
                UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta),
                Vector3::new(2.0 * theta.cos(), 2.0 * theta.sin(), 1.5),
            )
        })
        .collect();
    Trajectory::new(poses).expect("increasing timestamps")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key() -> RngKey {
        RngKey::new(21, "motion").with_op(5)
    }

    #[test]
    fn zero_deviation_is_bitwise_identity() {
        let traj = smooth_trajectory(50, 20.0);
        let spec = DeviationSpec::new(0.0, 0.0).unwrap();
        assert_eq!(perturb_trajectory(&traj, &spec, key()), traj);
    }

    #[test]
    fn negative_std_is_rejected() {
        assert!(DeviationSpec::new(-1.0, 0.0).is_err());
        assert!(DeviationSpec::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn translation_offset_mean_matches_chi3() {
        // Monte-Carlo oracle: mean norm of independent N(0, s^2 I3) samples
        // drawn from an unrelated stream, against the perturbation offsets.
        let n = 100_000;
        let sigma = 0.05;
        let traj = Trajectory::new((0..n).map(|i| Pose::identity(i as f64)).collect()).unwrap();
        let spec = DeviationSpec::new(0.0, sigma).unwrap();
        let out = perturb_trajectory(&traj, &spec, key());
        let got: f64 = out.poses().iter().map(|p| p.translation.norm()).sum::<f64>() / n as f64;
        let mut rng = derive_rng(RngKey::new(999, "oracle"));
        let oracle: f64 = (0..n)
            .map(|_| {
                let v: [f64; 3] = [
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                ];
                sigma * Vector3::from(v).norm()
            })
            .sum::<f64>()
            / n as f64;
        // chi_3 mean is sigma * sqrt(8/pi) ~ 0.0798; both estimates have std ~ 1e-4
        assert!((got - oracle).abs() < 1e-3, "{got} vs {oracle}");
        assert!((got - sigma * (8.0 / std::f64::consts::PI).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn downsample_examples() {
        let frames: Vec<usize> = (0..2000).collect();
        assert_eq!(downsample_stream(&frames, 2).unwrap().len(), 1000);
        assert_eq!(downsample_stream(&frames, 1).unwrap(), frames);
        assert_eq!(downsample_stream(&frames[..7], 4).unwrap(), vec![0, 4]);
        assert!(downsample_stream::<u8>(&[], 3).unwrap().is_empty());
        assert!(downsample_stream(&frames, 0).is_err());
    }

    #[test]
    fn static_trajectory_has_zero_motion() {
        let traj = Trajectory::new((0..5).map(|i| Pose::identity(i as f64)).collect()).unwrap();
        let s = motion_statistics(&traj, 20.0).unwrap();
        assert!(s.translation_speed.iter().chain(&s.rotation_speed).all(|&v| v == 0.0));
        assert_eq!(s.translation_speed.len(), 4);
        assert_eq!(s.translation_acceleration.len(), 3);
    }

    #[test]
    fn two_poses_five_cm_apart() {
        let a = Pose::identity(0.0);
        let mut b = Pose::identity(0.05);
        b.translation.x = 0.05;
        let s = motion_statistics(&Trajectory::new(vec![a, b]).unwrap(), 20.0).unwrap();
        assert!((s.translation_speed[0] - 1.0).abs() < 1e-12);
        assert!(s.translation_acceleration.is_empty());
    }

    #[test]
    fn single_pose_is_insufficient() {
        let t = Trajectory::new(vec![Pose::identity(0.0)]).unwrap();
        assert!(matches!(motion_statistics(&t, 20.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn constant_velocity_has_zero_acceleration() {
        let s = motion_statistics(&smooth_trajectory(200, 20.0), 20.0).unwrap();
        assert!(s.translation_acceleration.iter().all(|a| a.abs() < 1e-9));
        assert!(s.rotation_acceleration.iter().all(|a| a.abs() < 1e-9));
    }

    proptest! {
        #[test]
        fn perturbation_preserves_shape(seed in 0u64..500, r in 0.0f64..10.0, t in 0.0f64..0.2) {
            let traj = smooth_trajectory(30, 20.0);
            let out = perturb_trajectory(&traj, &DeviationSpec::new(r, t).unwrap(), RngKey::new(seed, "p"));
            prop_assert_eq!(out.len(), traj.len());
            for (a, b) in traj.poses().iter().zip(out.poses()) {
                prop_assert_eq!(a.timestamp, b.timestamp);
                prop_assert!((b.rotation.quaternion().norm() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn downsample_composes(n in 0usize..300, a in 0u32..4, b in 0u32..4) {
            let (ra, rb) = (1usize << a, 1usize << b);
            let frames: Vec<usize> = (0..n).collect();
            let twice = downsample_stream(&downsample_stream(&frames, ra).unwrap(), rb).unwrap();
            prop_assert_eq!(twice, downsample_stream(&frames, ra * rb).unwrap());
        }
    }
}
