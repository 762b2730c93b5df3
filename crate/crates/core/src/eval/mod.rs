//! Trajectory and reconstruction metrics.

pub mod mesh;
pub mod trajectory;

use serde::Serialize;

pub use mesh::{mesh_metrics, read_xyz, write_xyz, MeshMetrics, MeshOptions, PointCloudPair};
pub use trajectory::{
    align, associate, ate, match_indices, rpe, success_rate, umeyama, Alignment, AlignmentKind, PosePairs,
    DEFAULT_MAX_DT,
};

use crate::error::Result;
use crate::types::Pose;

/// Value used for ATE and RPE when a run is counted as failed.
pub const FAILURE_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub alignment: AlignmentKind,
    pub rpe_delta: usize,
    pub max_dt: f64,
    /// Report association or alignment failures as capped values instead of
    /// returning the error.
    pub cap_failures: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            alignment: AlignmentKind::Se3,
            rpe_delta: 1,
            max_dt: DEFAULT_MAX_DT,
            cap_failures: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub ate_rmse: f64,
    pub rpe_trans_rmse: f64,
    pub rpe_rot_rmse: f64,
    pub success_rate: f64,
    pub matched: usize,
    pub alignment: AlignmentKind,
    pub scale: f64,
    pub failed: bool,
}

impl EvalReport {
    pub fn failure(alignment: AlignmentKind) -> Self {
        Self {
            ate_rmse: FAILURE_CAP,
            rpe_trans_rmse: FAILURE_CAP,
            rpe_rot_rmse: FAILURE_CAP,
            success_rate: 0.0,
            matched: 0,
            alignment,
            scale: 1.0,
            failed: true,
        }
    }
}

impl std::fmt::Display for EvalReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.failed {
            writeln!(f, "status        failed (capped)")?;
        }
        writeln!(f, "ATE RMSE      {:.6} m", self.ate_rmse)?;
        writeln!(f, "RPE trans     {:.6} m", self.rpe_trans_rmse)?;
        writeln!(f, "RPE rot       {:.6} deg", self.rpe_rot_rmse)?;
        writeln!(f, "success rate  {:.4}", self.success_rate)?;
        writeln!(f, "matched       {}", self.matched)?;
        write!(f, "alignment     {:?} (scale {:.6})", self.alignment, self.scale)
    }
}

pub fn evaluate(gt: &[Pose], est: &[Pose], opts: &EvalOptions) -> Result<EvalReport> {
    let run = || -> Result<EvalReport> {
        let pairs = associate(gt, est, opts.max_dt)?;
        let alignment = align(&pairs, opts.alignment)?;
        let (rpe_t, rpe_r) = rpe(&pairs, opts.rpe_delta)?;
        Ok(EvalReport {
            ate_rmse: ate(&pairs, &alignment),
            rpe_trans_rmse: rpe_t,
            rpe_rot_rmse: rpe_r,
            success_rate: success_rate(gt, est, opts.max_dt),
            matched: pairs.len(),
            alignment: opts.alignment,
            scale: alignment.scale,
            failed: false,
        })
    };
    match run() {
        Err(e) if opts.cap_failures && !e.is_io() => {
            log::warn!("evaluation failed, reporting capped values: {e}");
            Ok(EvalReport::failure(opts.alignment))
        }
        other => other,
    }
}
