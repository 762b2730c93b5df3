use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ImagingOp, PipelineConfig, Plan, DESYNC_OP, MOTION_OP};
use crate::dataset_io::{self, SequenceLayout, MANIFEST_FILE};
use crate::depth::apply_depth;
use crate::desync::{desync_pairs, Pairing};
use crate::error::{Error, Result};
use crate::motion::{downsample_indices, perturb_trajectory};
use crate::perturbation::effective_level;
use crate::rgb::apply_rgb;
use crate::rng::{op_id, RngKey};
use crate::severity::severity_params;
use crate::types::Mode;

pub const TOOLKIT: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    pub params: serde_json::Value,
    /// Random-stream id, hex.
    pub op: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub rgb_source: usize,
    pub depth_source: usize,
    pub pose_source: usize,
    /// Depth source minus RGB source, in input frames.
    pub offset: isize,
    /// Effective level of each imaging stage, RGB stages first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<u8>,
    pub rgb_sha256: String,
    pub depth_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub version: String,
    /// The recipe as applied: paths and disabled stages removed, sequence id
    /// resolved.
    pub config: PipelineConfig,
    pub input_frames: usize,
    pub output_frames: usize,
    pub stages: Vec<StageRecord>,
    pub frames: Vec<FrameRecord>,
    pub trajectory_sha256: String,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Sequence {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn stage_names(&self) -> Vec<String> {
        self.stages
            .iter()
            .map(|s| s.kind.clone().unwrap_or_else(|| s.stage.clone()))
            .collect()
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Runs a recipe whose `input` and `output` paths are set.
pub fn run(cfg: &PipelineConfig, opts: &RunOptions) -> Result<Manifest> {
    let input = cfg
        .input
        .clone()
        .ok_or_else(|| Error::Config("no input sequence given".into()))?;
    let output = cfg
        .output
        .clone()
        .ok_or_else(|| Error::Config("no output directory given".into()))?;
    let plan = cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    prepare_output(&input, &output)?;
    let result = pool.install(|| execute(cfg, &plan, &input, &output));
    if result.is_err() {
        if let Err(e) = fs::remove_dir_all(&output) {
            log::warn!("could not remove partial output {}: {e}", output.display());
        }
    }
    result
}

fn prepare_output(input: &Path, output: &Path) -> Result<()> {
    if let (Ok(a), Ok(b)) = (input.canonicalize(), output.canonicalize()) {
        if a == b {
            return Err(Error::Config("output directory must differ from the input".into()));
        }
    }
    if output.exists() {
        let mut entries = fs::read_dir(output).map_err(|e| Error::io(output, e))?;
        let empty = entries.next().is_none();
        if !empty && !output.join(MANIFEST_FILE).exists() {
            return Err(Error::Config(format!(
                "refusing to overwrite {}: it is not empty and holds no previous output",
                output.display()
            )));
        }
        fs::remove_dir_all(output).map_err(|e| Error::io(output, e))?;
    }
    fs::create_dir_all(output).map_err(|e| Error::io(output, e))
}

fn frame_key(base: RngKey, frame: usize, op: &ImagingOp) -> RngKey {
    base.with_frame(frame as u64).with_op(op.op)
}

fn imaging_record(stage: &str, op: &ImagingOp) -> StageRecord {
    let kind = op.spec.kind().imaging().expect("imaging stage");
    let level = op.spec.level().expect("imaging stages carry a level");
    let params = severity_params(kind, level);
    StageRecord {
        stage: stage.into(),
        kind: Some(kind.to_string()),
        mode: Some(op.spec.mode()),
        level: Some(level.get()),
        params: serde_json::to_value(params).expect("params serialize"),
        op: format!("{:016x}", op.op),
    }
}

fn stage_records(plan: &Plan) -> Vec<StageRecord> {
    let mut out = Vec::new();
    if let Some(m) = &plan.motion {
        out.push(StageRecord {
            stage: "motion".into(),
            kind: None,
            mode: None,
            level: None,
            params: serde_json::to_value(m).expect("serializes"),
            op: format!("{:016x}", op_id(MOTION_OP, 0)),
        });
    }
    if let Some(r) = plan.downsample {
        out.push(StageRecord {
            stage: "downsample".into(),
            kind: None,
            mode: None,
            level: None,
            params: serde_json::json!({ "ratio": r }),
            op: String::new(),
        });
    }
    out.extend(plan.rgb.iter().map(|op| imaging_record("rgb", op)));
    out.extend(plan.depth.iter().map(|op| imaging_record("depth", op)));
    if let Some(d) = &plan.desync {
        out.push(StageRecord {
            stage: "desync".into(),
            kind: None,
            mode: Some(d.mode),
            level: None,
            params: serde_json::to_value(d).expect("serializes"),
            op: format!("{:016x}", op_id(DESYNC_OP, 0)),
        });
    }
    out
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn copy_file(from: &Path, to: &Path) -> Result<()> {
    fs::copy(from, to).map(|_| ()).map_err(|e| Error::io(from, e))
}

fn process_rgb(src: &Path, dst: &Path, ops: &[ImagingOp], base: RngKey, frame: usize) -> Result<()> {
    if ops.is_empty() && is_png(src) {
        return copy_file(src, dst);
    }
    let mut img = dataset_io::read_rgb(src)?;
    for op in ops {
        img = apply_rgb(&img, &op.spec, frame_key(base, frame, op))?;
    }
    dataset_io::write_rgb(dst, &img)
}

fn process_depth(
    src: &Path,
    dst: &Path,
    ops: &[ImagingOp],
    base: RngKey,
    frame: usize,
    scale: f64,
) -> Result<()> {
    if ops.is_empty() {
        return copy_file(src, dst);
    }
    let mut d = dataset_io::read_depth(src, scale)?;
    for op in ops {
        d = apply_depth(&d, &op.spec, frame_key(base, frame, op))?;
    }
    dataset_io::write_depth(dst, &d, scale)
}

fn levels_for(ops: &[ImagingOp], base: RngKey, frame: usize) -> impl Iterator<Item = u8> + '_ {
    ops.iter().map(move |op| {
        let level = op.spec.level().expect("imaging stages carry a level");
        effective_level(level, op.spec.mode(), frame_key(base, frame, op)).get()
    })
}

fn execute(cfg: &PipelineConfig, plan: &Plan, input: &Path, output: &Path) -> Result<Manifest> {
    let in_layout = SequenceLayout::new(input).with_depth_scale(plan.depth_scale);
    let out_layout = SequenceLayout::new(output).with_depth_scale(plan.depth_scale);
    let files = dataset_io::discover_frames(&in_layout)?;
    let trajectory = dataset_io::read_trajectory(&in_layout.trajectory_path())?;
    if trajectory.len() != files.len() {
        return Err(Error::Sequence {
            path: input.to_path_buf(),
            reason: format!("{} frames but {} trajectory poses", files.len(), trajectory.len()),
        });
    }
    let n = files.len();
    let out_len = plan.check_length(n)?;

    let fallback_id = input
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string();
    let sequence_id = plan.sequence_id.clone().unwrap_or(fallback_id);
    let base = RngKey::new(plan.seed, &sequence_id);

    // motion deviation acts on the trajectory labels
    let trajectory = match &plan.motion {
        Some(spec) => perturb_trajectory(&trajectory, spec, base.with_op(op_id(MOTION_OP, 0))),
        None => trajectory,
    };
    let kept = downsample_indices(n, plan.downsample.unwrap_or(1))?;
    let pairs: Vec<Pairing> = match &plan.desync {
        Some(spec) => desync_pairs(kept.len(), spec, base.with_op(op_id(DESYNC_OP, 0)))?,
        None => (0..kept.len()).map(|t| Pairing { t, rgb: t, depth: t }).collect(),
    };
    debug_assert_eq!(pairs.len(), out_len);
    log::info!(
        "{sequence_id}: {n} input frames -> {} output frames, {} rgb and {} depth stages",
        pairs.len(),
        plan.rgb.len(),
        plan.depth.len()
    );

    out_layout.create_dirs()?;
    let frames = pairs
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let (rgb_src, depth_src, pose_src) = (kept[p.rgb], kept[p.depth], kept[p.t]);
            let rgb_out = out_layout.rgb_path(k);
            let depth_out = out_layout.depth_path(k);
            let work = || -> Result<FrameRecord> {
                process_rgb(&files.rgb[rgb_src], &rgb_out, &plan.rgb, base, rgb_src)?;
                process_depth(
                    &files.depth[depth_src],
                    &depth_out,
                    &plan.depth,
                    base,
                    depth_src,
                    plan.depth_scale,
                )?;
                Ok(FrameRecord {
                    index: k,
                    rgb_source: rgb_src,
                    depth_source: depth_src,
                    pose_source: pose_src,
                    offset: depth_src as isize - rgb_src as isize,
                    levels: levels_for(&plan.rgb, base, rgb_src)
                        .chain(levels_for(&plan.depth, base, depth_src))
                        .collect(),
                    rgb_sha256: sha256_file(&rgb_out)?,
                    depth_sha256: sha256_file(&depth_out)?,
                })
            };
            work().map_err(|e| e.at_frame(k))
        })
        .collect::<Result<Vec<_>>>()?;

    let traj_out = out_layout.trajectory_path();
    let unchanged = plan.motion.is_none() && pairs.len() == n && pairs.iter().all(|p| kept[p.t] == p.t);
    if unchanged {
        copy_file(&in_layout.trajectory_path(), &traj_out)?;
    } else {
        let poses: Vec<_> = pairs.iter().map(|p| trajectory.poses()[kept[p.t]]).collect();
        dataset_io::write_trajectory(&traj_out, &poses)?;
    }

    let mut echo = cfg.clone();
    echo.input = None;
    echo.output = None;
    echo.sequence_id = Some(sequence_id);
    echo.stages.retain(|s| s.enabled());
    let manifest = Manifest {
        toolkit: TOOLKIT.into(),
        version: VERSION.into(),
        config: echo,
        input_frames: n,
        output_frames: frames.len(),
        stages: stage_records(plan),
        frames,
        trajectory_sha256: sha256_file(&traj_out)?,
    };
    write_manifest(&out_layout.manifest_path(), &manifest)?;
    Ok(manifest)
}

fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let tmp: PathBuf = path.with_extension("json.tmp");
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
