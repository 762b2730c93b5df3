//! Perturbation kinds and their five-level parameter tables.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RgbKind {
    GaussianNoise,
    ShotNoise,
    ImpulseNoise,
    SpeckleNoise,
    GaussianBlur,
    DefocusBlur,
    MotionBlur,
    GlassBlur,
    Snow,
    Frost,
    Fog,
    Spatter,
    Brightness,
    Contrast,
    Jpeg,
    Pixelate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RgbCategory {
    Noise,
    Blur,
    Environment,
    PostProcess,
}

impl RgbKind {
    pub const ALL: [RgbKind; 16] = [
        RgbKind::Snow,
        RgbKind::Frost,
        RgbKind::Fog,
        RgbKind::Spatter,
        RgbKind::DefocusBlur,
        RgbKind::GlassBlur,
        RgbKind::MotionBlur,
        RgbKind::GaussianBlur,
        RgbKind::GaussianNoise,
        RgbKind::ShotNoise,
        RgbKind::ImpulseNoise,
        RgbKind::SpeckleNoise,
        RgbKind::Brightness,
        RgbKind::Contrast,
        RgbKind::Jpeg,
        RgbKind::Pixelate,
    ];

    pub fn category(self) -> RgbCategory {
        use RgbKind::*;
        match self {
            GaussianNoise | ShotNoise | ImpulseNoise | SpeckleNoise => RgbCategory::Noise,
            GaussianBlur | DefocusBlur | MotionBlur | GlassBlur => RgbCategory::Blur,
            Snow | Frost | Fog | Spatter => RgbCategory::Environment,
            Brightness | Contrast | Jpeg | Pixelate => RgbCategory::PostProcess,
        }
    }

    /// Kinds whose output depends on random draws.
    pub fn is_stochastic(self) -> bool {
        use RgbKind::*;
        !matches!(
            self,
            GaussianBlur | DefocusBlur | Brightness | Contrast | Jpeg | Pixelate
        )
    }

    pub fn name(self) -> &'static str {
        use RgbKind::*;
        match self {
            GaussianNoise => "gaussian_noise",
            ShotNoise => "shot_noise",
            ImpulseNoise => "impulse_noise",
            SpeckleNoise => "speckle_noise",
            GaussianBlur => "gaussian_blur",
            DefocusBlur => "defocus_blur",
            MotionBlur => "motion_blur",
            GlassBlur => "glass_blur",
            Snow => "snow",
            Frost => "frost",
            Fog => "fog",
            Spatter => "spatter",
            Brightness => "brightness",
            Contrast => "contrast",
            Jpeg => "jpeg",
            Pixelate => "pixelate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthKind {
    GaussianNoise,
    EdgeErosion,
    RandomMissing,
    RangeClip,
}

impl DepthKind {
    pub const ALL: [DepthKind; 4] = [
        DepthKind::GaussianNoise,
        DepthKind::EdgeErosion,
        DepthKind::RandomMissing,
        DepthKind::RangeClip,
    ];

    pub fn is_stochastic(self) -> bool {
        !matches!(self, DepthKind::RangeClip)
    }

    pub fn name(self) -> &'static str {
        match self {
            DepthKind::GaussianNoise => "gaussian_noise",
            DepthKind::EdgeErosion => "edge_erosion",
            DepthKind::RandomMissing => "random_missing",
            DepthKind::RangeClip => "range_clip",
        }
    }
}

impl fmt::Display for RgbKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for DepthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RgbKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RgbKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown rgb perturbation kind '{s}'")))
    }
}

impl FromStr for DepthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DepthKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown depth perturbation kind '{s}'")))
    }
}

/// Any perturbation that operates on a single image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImagingKind {
    Rgb(RgbKind),
    Depth(DepthKind),
}

impl ImagingKind {
    pub fn all() -> impl Iterator<Item = ImagingKind> {
        RgbKind::ALL
            .into_iter()
            .map(ImagingKind::Rgb)
            .chain(DepthKind::ALL.into_iter().map(ImagingKind::Depth))
    }
}

impl fmt::Display for ImagingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImagingKind::Rgb(k) => write!(f, "rgb:{k}"),
            ImagingKind::Depth(k) => write!(f, "depth:{k}"),
        }
    }
}

/// Severity level, 1 (mildest) to 5 (strongest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SeverityLevel(u8);

impl SeverityLevel {
    pub const MIN: SeverityLevel = SeverityLevel(1);
    pub const MAX: SeverityLevel = SeverityLevel(5);

    pub fn new(level: u8) -> Result<Self> {
        if (1..=5).contains(&level) {
            Ok(Self(level))
        } else {
            Err(Error::Config(format!(
                "severity level {level} outside 1..=5"
            )))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = SeverityLevel> {
        (1..=5).map(SeverityLevel)
    }

    /// Level shifted by `delta` and clamped to the valid range.
    pub fn offset_clamped(self, delta: i8) -> Self {
        Self((self.0 as i8 + delta).clamp(1, 5) as u8)
    }

    fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl TryFrom<u8> for SeverityLevel {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SeverityLevel> for u8 {
    fn from(l: SeverityLevel) -> u8 {
        l.0
    }
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnowParams {
    pub mean: f64,
    pub std: f64,
    pub scale: f64,
    pub threshold: f64,
    pub blur_radius: f64,
    pub blur_sigma: f64,
    pub blend: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatterParams {
    pub mean: f64,
    pub std: f64,
    pub sigma: f64,
    pub threshold: f64,
    pub scale: f64,
    pub complexity: u8,
}

/// Typed parameters for one imaging perturbation at one severity level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    Snow(SnowParams),
    Frost { intensity: f64, texture: f64 },
    Fog { thickness: f64, smoothness: f64 },
    Spatter(SpatterParams),
    DefocusBlur { radius: f64, alias_sigma: f64 },
    GlassBlur { sigma: f64, max_delta: usize, iterations: usize },
    MotionBlur { radius: f64, sigma: f64 },
    GaussianBlur { sigma: f64 },
    GaussianNoise { scale: f64 },
    ShotNoise { photons: f64 },
    ImpulseNoise { amount: f64 },
    SpeckleNoise { scale: f64 },
    Brightness { offset: f64 },
    Contrast { factor: f64 },
    Jpeg { quality: u8 },
    Pixelate { factor: f64 },
    DepthGaussianNoise { scale: f64 },
    EdgeErosion { rate: f64 },
    RandomMissing { rate: f64 },
    RangeClip { min: f64, max: f64 },
}

struct TableRow {
    kind: ImagingKind,
    title: &'static str,
    parameter: &'static str,
    levels: [&'static [f64]; 5],
}

const TABLE: [TableRow; 20] = [
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Snow),
        title: "Snow Effect",
        parameter: "(Mean, std, scale, threshold, blur radius, blur std, blending ratio)",
        levels: [
            &[0.1, 0.3, 3.0, 0.5, 10.0, 4.0, 0.8],
            &[0.2, 0.3, 2.0, 0.5, 12.0, 4.0, 0.7],
            &[0.55, 0.3, 4.0, 0.9, 12.0, 8.0, 0.7],
            &[0.55, 0.3, 4.5, 0.85, 12.0, 8.0, 0.65],
            &[0.55, 0.3, 2.5, 0.85, 12.0, 12.0, 0.55],
        ],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Frost),
        title: "Frost Effect",
        parameter: "(Frost intensity, texture influence)",
        levels: [
            &[1.00, 0.40],
            &[0.80, 0.60],
            &[0.70, 0.70],
            &[0.65, 0.70],
            &[0.60, 0.75],
        ],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Fog),
        title: "Fog Effect",
        parameter: "(Thickness, smoothness)",
        levels: [&[1.5, 2.0], &[2.0, 2.0], &[2.5, 1.7], &[2.5, 1.5], &[3.0, 1.4]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Spatter),
        title: "Spatter Effect",
        parameter: "(mean, standard deviation, sigma, threshold, scaling factor, complexity of effect)",
        levels: [
            &[0.65, 0.3, 4.0, 0.69, 0.6, 0.0],
            &[0.65, 0.3, 3.0, 0.68, 0.6, 0.0],
            &[0.65, 0.3, 2.0, 0.68, 0.5, 0.0],
            &[0.65, 0.3, 1.0, 0.65, 1.5, 1.0],
            &[0.67, 0.4, 1.0, 0.65, 1.5, 1.0],
        ],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::DefocusBlur),
        title: "Defocus Blur",
        parameter: "(Kernel radius, alias blur)",
        levels: [&[3.0, 0.1], &[4.0, 0.5], &[6.0, 0.5], &[8.0, 0.5], &[10.0, 0.5]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::GlassBlur),
        title: "Glass Blur",
        parameter: "(Sigma, max delta, iterations)",
        levels: [
            &[0.7, 1.0, 2.0],
            &[0.9, 2.0, 1.0],
            &[1.0, 2.0, 3.0],
            &[1.1, 3.0, 2.0],
            &[1.5, 4.0, 2.0],
        ],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::MotionBlur),
        title: "Motion Blur",
        parameter: "(Radius, sigma)",
        levels: [&[10.0, 3.0], &[15.0, 5.0], &[15.0, 8.0], &[15.0, 12.0], &[20.0, 15.0]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::GaussianBlur),
        title: "Gaussian Blur",
        parameter: "Sigma",
        levels: [&[1.0], &[2.0], &[3.0], &[4.0], &[6.0]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::GaussianNoise),
        title: "Gaussian Noise",
        parameter: "Noise scale",
        levels: [&[0.08], &[0.12], &[0.18], &[0.26], &[0.38]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::ShotNoise),
        title: "Shot Noise",
        parameter: "Photon number",
        levels: [&[60.0], &[25.0], &[12.0], &[5.0], &[3.0]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::ImpulseNoise),
        title: "Impulse Noise",
        parameter: "Noise amount",
        levels: [&[0.03], &[0.06], &[0.09], &[0.17], &[0.27]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::SpeckleNoise),
        title: "Speckle Noise",
        parameter: "Noise scale",
        levels: [&[0.15], &[0.2], &[0.35], &[0.45], &[0.6]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Brightness),
        title: "Brightness Increase",
        parameter: "Adjustment ratio",
        levels: [&[0.1], &[0.2], &[0.3], &[0.4], &[0.5]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Contrast),
        title: "Contrast Decrease",
        parameter: "Adjustment of pixel mean",
        levels: [&[0.40], &[0.30], &[0.20], &[0.10], &[0.05]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Jpeg),
        title: "JPEG Compression",
        parameter: "Compression quality",
        levels: [&[25.0], &[18.0], &[15.0], &[10.0], &[7.0]],
    },
    TableRow {
        kind: ImagingKind::Rgb(RgbKind::Pixelate),
        title: "Pixelate",
        parameter: "Resize factor",
        levels: [&[0.60], &[0.50], &[0.40], &[0.30], &[0.25]],
    },
    TableRow {
        kind: ImagingKind::Depth(DepthKind::GaussianNoise),
        title: "Gaussian Noise",
        parameter: "Noise scale",
        levels: [&[0.1], &[0.2], &[0.3], &[0.4], &[0.5]],
    },
    TableRow {
        kind: ImagingKind::Depth(DepthKind::EdgeErosion),
        title: "Edge Erosion",
        parameter: "Erosion rate",
        levels: [&[0.015], &[0.020], &[0.025], &[0.03], &[0.035]],
    },
    TableRow {
        kind: ImagingKind::Depth(DepthKind::RandomMissing),
        title: "Random missing depth data",
        parameter: "Missing rate (%)",
        levels: [&[10.0], &[15.0], &[20.0], &[25.0], &[30.0]],
    },
    TableRow {
        kind: ImagingKind::Depth(DepthKind::RangeClip),
        title: "Range clipping",
        parameter: "(Min depth, Max depth)",
        levels: [&[0.2, 4.4], &[0.3, 4.2], &[0.4, 4.0], &[0.5, 3.8], &[0.6, 3.6]],
    },
];

fn row(kind: ImagingKind) -> &'static TableRow {
    TABLE
        .iter()
        .find(|r| r.kind == kind)
        .expect("every imaging kind has a table row")
}

/// Raw table cell for `kind` at `level`, in the units the table uses.
pub fn raw_params(kind: ImagingKind, level: SeverityLevel) -> &'static [f64] {
    row(kind).levels[level.index()]
}

pub fn severity_params(kind: ImagingKind, level: SeverityLevel) -> Params {
    let v = raw_params(kind, level);
    match kind {
        ImagingKind::Rgb(k) => rgb_params(k, v),
        ImagingKind::Depth(k) => match k {
            DepthKind::GaussianNoise => Params::DepthGaussianNoise { scale: v[0] },
            DepthKind::EdgeErosion => Params::EdgeErosion { rate: v[0] },
            DepthKind::RandomMissing => Params::RandomMissing { rate: v[0] / 100.0 },
            DepthKind::RangeClip => Params::RangeClip {
                min: v[0],
                max: v[1],
            },
        },
    }
}

fn rgb_params(kind: RgbKind, v: &[f64]) -> Params {
    use RgbKind::*;
    match kind {
        Snow => Params::Snow(SnowParams {
            mean: v[0],
            std: v[1],
            scale: v[2],
            threshold: v[3],
            blur_radius: v[4],
            blur_sigma: v[5],
            blend: v[6],
        }),
        Frost => Params::Frost {
            intensity: v[0],
            texture: v[1],
        },
        Fog => Params::Fog {
            thickness: v[0],
            smoothness: v[1],
        },
        Spatter => Params::Spatter(SpatterParams {
            mean: v[0],
            std: v[1],
            sigma: v[2],
            threshold: v[3],
            scale: v[4],
            complexity: v[5] as u8,
        }),
        DefocusBlur => Params::DefocusBlur {
            radius: v[0],
            alias_sigma: v[1],
        },
        GlassBlur => Params::GlassBlur {
            sigma: v[0],
            max_delta: v[1] as usize,
            iterations: v[2] as usize,
        },
        MotionBlur => Params::MotionBlur {
            radius: v[0],
            sigma: v[1],
        },
        GaussianBlur => Params::GaussianBlur { sigma: v[0] },
        GaussianNoise => Params::GaussianNoise { scale: v[0] },
        ShotNoise => Params::ShotNoise { photons: v[0] },
        ImpulseNoise => Params::ImpulseNoise { amount: v[0] },
        SpeckleNoise => Params::SpeckleNoise { scale: v[0] },
        Brightness => Params::Brightness { offset: v[0] },
        Contrast => Params::Contrast { factor: v[0] },
        Jpeg => Params::Jpeg {
            quality: v[0] as u8,
        },
        Pixelate => Params::Pixelate { factor: v[0] },
    }
}

/// Looks up parameters by textual kind (`rgb:<kind>` or `depth:<kind>`) and
/// numeric level, as found in configuration files.
pub fn severity_params_by_name(kind: &str, level: u8) -> Result<Params> {
    let kind = parse_imaging_kind(kind)?;
    Ok(severity_params(kind, SeverityLevel::new(level)?))
}

pub fn parse_imaging_kind(s: &str) -> Result<ImagingKind> {
    match s.split_once(':') {
        Some(("rgb", k)) => Ok(ImagingKind::Rgb(k.parse()?)),
        Some(("depth", k)) => Ok(ImagingKind::Depth(k.parse()?)),
        _ => Err(Error::Config(format!(
            "unknown perturbation kind '{s}' (expected rgb:<kind> or depth:<kind>)"
        ))),
    }
}

/// Markdown dump of both severity tables, generated from the lookup above.
pub fn table_markdown() -> String {
    let mut out = String::new();
    for (heading, depth) in [("RGB imaging perturbations", false), ("Depth imaging perturbations", true)] {
        let _ = writeln!(out, "### {heading}\n");
        out.push_str("| Key | Perturbation | Parameter | Level 1 | Level 2 | Level 3 | Level 4 | Level 5 |\n");
        out.push_str("|---|---|---|---|---|---|---|---|\n");
        for r in TABLE
            .iter()
            .filter(|r| matches!(r.kind, ImagingKind::Depth(_)) == depth)
        {
            let _ = write!(out, "| {} | {} | {} |", r.kind, r.title, r.parameter);
            for level in SeverityLevel::all() {
                let cell: Vec<String> = raw_params(r.kind, level)
                    .iter()
                    .map(|v| v.to_string())
                    .collect();
                let _ = write!(out, " {} |", cell.join(", "));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
