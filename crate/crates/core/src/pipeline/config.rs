use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset_io::DEFAULT_DEPTH_SCALE;
use crate::desync::{DelayedStream, DesyncSpec};
use crate::error::{Error, Result};
use crate::motion::{DeviationSpec, DEFAULT_FRAME_RATE};
use crate::perturbation::PerturbationSpec;
use crate::rng::{op_id, RngKey};
use crate::severity::{DepthKind, RgbKind, SeverityLevel};
use crate::types::Mode;

fn yes() -> bool {
    true
}

fn default_frame_rate() -> f64 {
    DEFAULT_FRAME_RATE
}

fn default_depth_scale() -> f64 {
    DEFAULT_DEPTH_SCALE
}

fn is_true(b: &bool) -> bool {
    *b
}

/// One `[[stages]]` entry of a recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "lowercase")]
pub enum StageConfig {
    Motion(MotionStage),
    Downsample(DownsampleStage),
    Rgb(ImagingStage),
    Depth(ImagingStage),
    Desync(DesyncStage),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionStage {
    #[serde(default)]
    pub rotation_std_deg: f64,
    #[serde(default)]
    pub translation_std_m: f64,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownsampleStage {
    pub ratio: usize,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingStage {
    pub kind: String,
    pub level: u8,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesyncStage {
    pub interval: u32,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub delayed: DelayedStream,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub enabled: bool,
}

impl StageConfig {
    pub fn name(&self) -> &'static str {
        match self {
            StageConfig::Motion(_) => "motion",
            StageConfig::Downsample(_) => "downsample",
            StageConfig::Rgb(_) => "rgb",
            StageConfig::Depth(_) => "depth",
            StageConfig::Desync(_) => "desync",
        }
    }

    pub fn enabled(&self) -> bool {
        match self {
            StageConfig::Motion(s) => s.enabled,
            StageConfig::Downsample(s) => s.enabled,
            StageConfig::Rgb(s) | StageConfig::Depth(s) => s.enabled,
            StageConfig::Desync(s) => s.enabled,
        }
    }

    pub fn set_enabled(&mut self, on: bool) {
        match self {
            StageConfig::Motion(s) => s.enabled = on,
            StageConfig::Downsample(s) => s.enabled = on,
            StageConfig::Rgb(s) | StageConfig::Depth(s) => s.enabled = on,
            StageConfig::Desync(s) => s.enabled = on,
        }
    }

    /// Position in the propagation order.
    fn rank(&self) -> u8 {
        match self {
            StageConfig::Motion(_) => 0,
            StageConfig::Downsample(_) => 1,
            StageConfig::Rgb(_) => 2,
            StageConfig::Depth(_) => 3,
            StageConfig::Desync(_) => 4,
        }
    }
}

/// A perturbation recipe as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Keys the random streams; defaults to the input directory name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_id: Option<String>,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    #[serde(default = "default_depth_scale")]
    pub depth_scale: f64,
    #[serde(default)]
    pub stages: Vec<StageConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            output: None,
            seed: 0,
            sequence_id: None,
            frame_rate: DEFAULT_FRAME_RATE,
            depth_scale: DEFAULT_DEPTH_SCALE,
            stages: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a recipe; relative `input`/`output` paths are resolved against
    /// the recipe's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<Plan> {
        Plan::from_config(self)
    }
}

/// An imaging stage resolved to a spec and its random-stream op id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingOp {
    pub spec: PerturbationSpec,
    pub op: u64,
}

/// A validated config: enabled stages only, in propagation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub seed: u64,
    pub sequence_id: Option<String>,
    pub frame_rate: f64,
    pub depth_scale: f64,
    pub motion: Option<DeviationSpec>,
    pub downsample: Option<usize>,
    pub rgb: Vec<ImagingOp>,
    pub depth: Vec<ImagingOp>,
    pub desync: Option<DesyncSpec>,
}

pub(crate) const MOTION_OP: &str = "motion";
pub(crate) const DESYNC_OP: &str = "desync";

impl Plan {
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self> {
        if !(cfg.frame_rate > 0.0 && cfg.frame_rate.is_finite()) {
            return Err(Error::Config(format!("frame_rate must be positive, got {}", cfg.frame_rate)));
        }
        if !(cfg.depth_scale > 0.0 && cfg.depth_scale.is_finite()) {
            return Err(Error::Config(format!("depth_scale must be positive, got {}", cfg.depth_scale)));
        }
        let stages: Vec<&StageConfig> = cfg.stages.iter().filter(|s| s.enabled()).collect();
        for pair in stages.windows(2) {
            if pair[1].rank() < pair[0].rank() {
                return Err(Error::Config(format!(
                    "stage '{}' may not follow stage '{}': the order is motion, downsample, rgb, depth, desync",
                    pair[1].name(),
                    pair[0].name()
                )));
            }
        }
        for single in ["motion", "downsample", "desync"] {
            if stages.iter().filter(|s| s.name() == single).count() > 1 {
                return Err(Error::Config(format!("stage '{single}' may appear at most once")));
            }
        }

        let mut plan = Plan {
            seed: cfg.seed,
            sequence_id: cfg.sequence_id.clone(),
            frame_rate: cfg.frame_rate,
            depth_scale: cfg.depth_scale,
            motion: None,
            downsample: None,
            rgb: Vec::new(),
            depth: Vec::new(),
            desync: None,
        };
        let mut seen: Vec<String> = Vec::new();
        let mut next_op = |name: String| {
            let occurrence = seen.iter().filter(|n| **n == name).count() as u32;
            let id = op_id(&name, occurrence);
            seen.push(name);
            id
        };
        for stage in stages {
            match stage {
                StageConfig::Motion(m) => {
                    plan.motion = Some(DeviationSpec::new(m.rotation_std_deg, m.translation_std_m)?);
                }
                StageConfig::Downsample(d) => {
                    if d.ratio == 0 {
                        return Err(Error::Config("downsample ratio must be >= 1".into()));
                    }
                    plan.downsample = Some(d.ratio);
                }
                StageConfig::Rgb(s) => {
                    let kind: RgbKind = s.kind.parse()?;
                    let spec = PerturbationSpec::rgb(kind, SeverityLevel::new(s.level)?, s.mode);
                    plan.rgb.push(ImagingOp { spec, op: next_op(format!("rgb:{kind}")) });
                }
                StageConfig::Depth(s) => {
                    let kind: DepthKind = s.kind.parse()?;
                    let spec = PerturbationSpec::depth(kind, SeverityLevel::new(s.level)?, s.mode);
                    plan.depth.push(ImagingOp { spec, op: next_op(format!("depth:{kind}")) });
                }
                StageConfig::Desync(d) => {
                    plan.desync = Some(DesyncSpec {
                        interval: d.interval,
                        mode: d.mode,
                        delayed: d.delayed,
                    });
                }
            }
        }
        Ok(plan)
    }

    pub fn is_identity(&self) -> bool {
        self.motion.is_none()
            && self.downsample.unwrap_or(1) == 1
            && self.rgb.is_empty()
            && self.depth.is_empty()
            && self.desync.is_none_or(|d| d.interval == 0 && d.mode == Mode::Static)
    }

    /// Checks the frame-count constraint for an `n`-frame input and returns
    /// the output length.
    pub fn check_length(&self, n: usize) -> Result<usize> {
        let m = n.div_ceil(self.downsample.unwrap_or(1));
        let delta = self.desync.map_or(0, |d| d.interval as usize);
        if delta >= m {
            return Err(Error::Config(format!(
                "desync interval {delta} must be smaller than the {m} frames left after downsampling"
            )));
        }
        Ok(m - delta)
    }

    pub fn base_key(&self, fallback_id: &str) -> RngKey {
        RngKey::new(self.seed, self.sequence_id.as_deref().unwrap_or(fallback_id))
    }
}
