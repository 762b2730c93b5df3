//! Benchmark recipes: the RGB, depth, deviation, downsample and desync grids
//! plus the six-perturbation mixture.

use std::path::Path;

use super::config::{DesyncStage, DownsampleStage, ImagingStage, MotionStage, PipelineConfig, StageConfig};
use crate::desync::{DelayedStream, INTERVAL_PRESETS};
use crate::error::{Error, Result};
use crate::motion::{DOWNSAMPLE_PRESETS, ROTATION_STD_PRESETS, TRANSLATION_STD_PRESETS};
use crate::severity::{DepthKind, RgbKind};
use crate::types::Mode;

pub const PRESET_RGB_LEVELS: [u8; 3] = [1, 3, 5];
pub const PRESET_DEPTH_LEVEL: u8 = 3;
/// Level used for "medium" severity in the mixture recipe.
pub const MIXTURE_LEVEL: u8 = 3;
pub const MIXTURE_INTERVAL: u32 = 10;
pub const MIXTURE_NAME: &str = "mixture_table3";

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub config: PipelineConfig,
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Static => "static",
        Mode::Dynamic => "dynamic",
    }
}

fn imaging(kind: &str, level: u8, mode: Mode) -> ImagingStage {
    ImagingStage {
        kind: kind.into(),
        level,
        mode,
        enabled: true,
    }
}

fn preset(name: String, stages: Vec<StageConfig>) -> Preset {
    Preset {
        name,
        config: PipelineConfig {
            stages,
            ..PipelineConfig::default()
        },
    }
}

fn format_mm(m: f64) -> String {
    let mm = m * 1000.0;
    if mm.fract() == 0.0 {
        format!("{mm:.0}")
    } else {
        format!("{mm}").replace('.', "p")
    }
}

/// The benchmark grid, 124 recipes.
pub fn benchmark_presets() -> Vec<Preset> {
    let mut out = Vec::new();
    for kind in RgbKind::ALL {
        for level in PRESET_RGB_LEVELS {
            for mode in [Mode::Static, Mode::Dynamic] {
                out.push(preset(
                    format!("rgb_{kind}_l{level}_{}", mode_name(mode)),
                    vec![StageConfig::Rgb(imaging(kind.name(), level, mode))],
                ));
            }
        }
    }
    for kind in DepthKind::ALL {
        out.push(preset(
            format!("depth_{kind}_l{PRESET_DEPTH_LEVEL}_static"),
            vec![StageConfig::Depth(imaging(kind.name(), PRESET_DEPTH_LEVEL, Mode::Static))],
        ));
    }
    for r in ROTATION_STD_PRESETS {
        for t in TRANSLATION_STD_PRESETS {
            if r == 0.0 && t == 0.0 {
                continue;
            }
            out.push(preset(
                format!("motion_r{r}deg_t{}mm", format_mm(t)),
                vec![StageConfig::Motion(MotionStage {
                    rotation_std_deg: r,
                    translation_std_m: t,
                    enabled: true,
                })],
            ));
        }
    }
    for ratio in DOWNSAMPLE_PRESETS {
        out.push(preset(
            format!("downsample_x{ratio}"),
            vec![StageConfig::Downsample(DownsampleStage { ratio, enabled: true })],
        ));
    }
    for interval in INTERVAL_PRESETS {
        for mode in [Mode::Static, Mode::Dynamic] {
            out.push(preset(
                format!("desync_d{interval}_{}", mode_name(mode)),
                vec![StageConfig::Desync(DesyncStage {
                    interval,
                    mode,
                    delayed: DelayedStream::Depth,
                    enabled: true,
                })],
            ));
        }
    }
    out
}

/// Snow, motion blur, Gaussian noise and JPEG on RGB, Gaussian noise on
/// depth, then a static delay; all at medium severity.
pub fn mixture_preset() -> Preset {
    let rgb = |kind: RgbKind| StageConfig::Rgb(imaging(kind.name(), MIXTURE_LEVEL, Mode::Static));
    preset(
        MIXTURE_NAME.into(),
        vec![
            rgb(RgbKind::Snow),
            rgb(RgbKind::MotionBlur),
            rgb(RgbKind::GaussianNoise),
            rgb(RgbKind::Jpeg),
            StageConfig::Depth(imaging(DepthKind::GaussianNoise.name(), MIXTURE_LEVEL, Mode::Static)),
            StageConfig::Desync(DesyncStage {
                interval: MIXTURE_INTERVAL,
                mode: Mode::Static,
                delayed: DelayedStream::Depth,
                enabled: true,
            }),
        ],
    )
}

pub fn all_presets() -> Vec<Preset> {
    let mut v = benchmark_presets();
    v.push(mixture_preset());
    v
}

pub fn find_preset(name: &str) -> Option<Preset> {
    all_presets().into_iter().find(|p| p.name == name)
}

/// Recipe text as shipped, with paths relative to the recipe directory.
pub fn recipe_text(p: &Preset, input: Option<&Path>, output_root: Option<&Path>) -> String {
    let mut cfg = p.config.clone();
    cfg.input = input.map(Path::to_path_buf);
    cfg.output = output_root.map(|r| r.join(&p.name));
    format!("# {}\n{}", p.name, cfg.to_toml())
}

/// Writes one `<name>.toml` per preset into `dir`.
pub fn write_recipes(dir: &Path, input: Option<&Path>, output_root: Option<&Path>) -> Result<usize> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let presets = all_presets();
    for p in &presets {
        let path = dir.join(format!("{}.toml", p.name));
        std::fs::write(&path, recipe_text(p, input, output_root)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(presets.len())
}
