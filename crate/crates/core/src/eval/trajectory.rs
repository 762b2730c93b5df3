use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Pose;

/// Default timestamp tolerance for association, seconds.
pub const DEFAULT_MAX_DT: f64 = 0.02;

/// Matched (ground truth, estimate) poses in estimate order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosePairs {
    pub gt: Vec<Pose>,
    pub est: Vec<Pose>,
}

impl PosePairs {
    pub fn new(gt: Vec<Pose>, est: Vec<Pose>) -> Result<Self> {
        if gt.len() != est.len() {
            return Err(Error::Parameter(format!(
                "pair lists differ in length ({} vs {})",
                gt.len(),
                est.len()
            )));
        }
        Ok(Self { gt, est })
    }

    pub fn len(&self) -> usize {
        self.gt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gt.is_empty()
    }
}

/// Greedy nearest-timestamp matching: candidate pairs within `max_dt` are
/// taken in order of increasing time difference, each pose used at most once.
pub fn associate(gt: &[Pose], est: &[Pose], max_dt: f64) -> Result<PosePairs> {
    let matches = match_indices(gt, est, max_dt);
    if matches.is_empty() {
        return Err(Error::Association(format!(
            "no estimate within {max_dt} s of any ground-truth pose ({} gt, {} est)",
            gt.len(),
            est.len()
        )));
    }
    PosePairs::new(
        matches.iter().map(|&(g, _)| gt[g]).collect(),
        matches.iter().map(|&(_, e)| est[e]).collect(),
    )
}

/// `(gt index, est index)` matches sorted by estimate index.
pub fn match_indices(gt: &[Pose], est: &[Pose], max_dt: f64) -> Vec<(usize, usize)> {
    let gt_times: Vec<f64> = gt.iter().map(|p| p.timestamp).collect();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (e, pose) in est.iter().enumerate() {
        // gt timestamps are sorted; look at the neighbours of the insertion point
        let pos = gt_times.partition_point(|&t| t < pose.timestamp - max_dt);
        for (g, &t) in gt_times.iter().enumerate().skip(pos) {
            let dt = (t - pose.timestamp).abs();
            if t > pose.timestamp + max_dt {
                break;
            }
            if dt <= max_dt {
                candidates.push((dt, g, e));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
    let mut gt_used = vec![false; gt.len()];
    let mut est_used = vec![false; est.len()];
    let mut matches = Vec::new();
    for (_, g, e) in candidates {
        if !gt_used[g] && !est_used[e] {
            gt_used[g] = true;
            est_used[e] = true;
            matches.push((g, e));
        }
    }
    matches.sort_by_key(|&(_, e)| e);
    matches
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentKind {
    None,
    #[default]
    Se3,
    Sim3,
}

/// `x -> scale * rotation * x + translation`, mapping estimate into the
/// ground-truth frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub kind: AlignmentKind,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub scale: f64,
}

impl Alignment {
    pub fn identity() -> Self {
        Self {
            kind: AlignmentKind::None,
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.scale * (self.rotation * p) + self.translation
    }
}

/// Closed-form least-squares registration (Umeyama) of the estimate
/// positions onto the ground-truth positions.
pub fn align(pairs: &PosePairs, kind: AlignmentKind) -> Result<Alignment> {
    if kind == AlignmentKind::None {
        return Ok(Alignment::identity());
    }
    let src: Vec<Vector3<f64>> = pairs.est.iter().map(|p| p.translation).collect();
    let dst: Vec<Vector3<f64>> = pairs.gt.iter().map(|p| p.translation).collect();
    umeyama(&src, &dst, kind == AlignmentKind::Sim3).map(|(rotation, translation, scale)| Alignment {
        kind,
        rotation,
        translation,
        scale,
    })
}

/// Returns `(R, t, s)` minimizing `sum |dst_i - (s R src_i + t)|^2`, with
/// `s = 1` unless `with_scale`.
pub fn umeyama(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
    with_scale: bool,
) -> Result<(Matrix3<f64>, Vector3<f64>, f64)> {
    let n = src.len();
    if n < 3 || dst.len() != n {
        return Err(Error::Alignment(format!(
            "need at least 3 matched positions, got {n}"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let mu_src = src.iter().sum::<Vector3<f64>>() * inv_n;
    let mu_dst = dst.iter().sum::<Vector3<f64>>() * inv_n;

    let mut cov = Matrix3::zeros();
    let mut src_scatter = Matrix3::zeros();
    let mut var_src = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let (cs, cd) = (s - mu_src, d - mu_dst);
        cov += cd * cs.transpose();
        src_scatter += cs * cs.transpose();
        var_src += cs.norm_squared();
    }
    cov *= inv_n;
    var_src *= inv_n;

    // collinear or coincident estimate positions leave the rotation undetermined
    let spread = src_scatter.symmetric_eigenvalues();
    let mut ev: Vec<f64> = spread.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev[0] <= 0.0 || ev[1] <= 1e-12 * ev[0] {
        return Err(Error::Alignment("estimate positions are degenerate (collinear)".into()));
    }

    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut signs = Vector3::new(1.0, 1.0, 1.0);
    if (u.determinant() * v_t.determinant()) < 0.0 {
        signs[2] = -1.0;
    }
    let rotation = u * Matrix3::from_diagonal(&signs) * v_t;
    let scale = if with_scale {
        svd.singular_values.dot(&signs) / var_src
    } else {
        1.0
    };
    let translation = mu_dst - scale * rotation * mu_src;
    Ok((rotation, translation, scale))
}

/// RMSE of translational residuals after applying `alignment` to the estimate.
pub fn ate(pairs: &PosePairs, alignment: &Alignment) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let sse: f64 = pairs
        .gt
        .iter()
        .zip(&pairs.est)
        .map(|(g, e)| (g.translation - alignment.apply(&e.translation)).norm_squared())
        .sum();
    (sse / pairs.len() as f64).sqrt()
}

/// RPE over a fixed frame offset: `(translation RMSE [m], rotation RMSE [deg])`.
pub fn rpe(pairs: &PosePairs, delta: usize) -> Result<(f64, f64)> {
    if delta == 0 || pairs.len() < delta + 1 {
        return Err(Error::InsufficientData(format!(
            "RPE with delta {delta} needs at least {} pairs, got {}",
            delta + 1,
            pairs.len()
        )));
    }
    let (mut trans_sse, mut rot_sse) = (0.0, 0.0);
    let count = pairs.len() - delta;
    for i in 0..count {
        let gt_rel = pairs.gt[i].isometry().inverse() * pairs.gt[i + delta].isometry();
        let est_rel = pairs.est[i].isometry().inverse() * pairs.est[i + delta].isometry();
        let err = gt_rel.inverse() * est_rel;
        trans_sse += err.translation.vector.norm_squared();
        rot_sse += err.rotation.angle().to_degrees().powi(2);
    }
    Ok(((trans_sse / count as f64).sqrt(), (rot_sse / count as f64).sqrt()))
}

/// Fraction of ground-truth frames for which an estimate was associated.
pub fn success_rate(gt: &[Pose], est: &[Pose], max_dt: f64) -> f64 {
    if gt.is_empty() {
        return 0.0;
    }
    match_indices(gt, est, max_dt).len() as f64 / gt.len() as f64
}
