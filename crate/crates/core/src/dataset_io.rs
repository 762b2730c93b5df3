//! Sequence directories: `rgb/%06d.png`, `depth/%06d.png` (16-bit) and a
//! `groundtruth.txt` trajectory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{DepthMap, Pose, RgbImage, Trajectory, VOID};

/// Stored depth units per meter.
pub const DEFAULT_DEPTH_SCALE: f64 = 6553.5;
pub const TRAJECTORY_FILE: &str = "groundtruth.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

const RGB_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceLayout {
    pub root: PathBuf,
    pub rgb_dir: String,
    pub depth_dir: String,
    pub trajectory_file: String,
    pub depth_scale: f64,
}

impl SequenceLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            rgb_dir: "rgb".into(),
            depth_dir: "depth".into(),
            trajectory_file: TRAJECTORY_FILE.into(),
            depth_scale: DEFAULT_DEPTH_SCALE,
        }
    }

    pub fn with_depth_scale(mut self, scale: f64) -> Self {
        self.depth_scale = scale;
        self
    }

    pub fn rgb_dir(&self) -> PathBuf {
        self.root.join(&self.rgb_dir)
    }

    pub fn depth_dir(&self) -> PathBuf {
        self.root.join(&self.depth_dir)
    }

    /// Output path of RGB frame `i` (always PNG).
    pub fn rgb_path(&self, i: usize) -> PathBuf {
        self.rgb_dir().join(frame_name(i, "png"))
    }

    pub fn depth_path(&self, i: usize) -> PathBuf {
        self.depth_dir().join(frame_name(i, "png"))
    }

    pub fn trajectory_path(&self) -> PathBuf {
        self.root.join(&self.trajectory_file)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    pub fn create_dirs(&self) -> Result<()> {
        for dir in [self.rgb_dir(), self.depth_dir()] {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(())
    }
}

pub fn frame_name(i: usize, ext: &str) -> String {
    format!("{i:06}.{ext}")
}

/// Frame files of an existing sequence, indexed from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFiles {
    pub rgb: Vec<PathBuf>,
    pub depth: Vec<PathBuf>,
}

impl FrameFiles {
    pub fn len(&self) -> usize {
        self.rgb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rgb.is_empty()
    }
}

fn list_frames(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>> {
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if !ext.is_some_and(|e| extensions.contains(&e.as_str())) {
            continue;
        }
        let Some(index) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse().ok()) else {
            continue;
        };
        found.push((index, path));
    }
    found.sort();
    for (expected, (index, path)) in found.iter().enumerate() {
        if *index != expected {
            return Err(Error::Sequence {
                path: dir.to_path_buf(),
                reason: format!(
                    "frame indices must be contiguous from 0; expected {expected}, found {}",
                    path.display()
                ),
            });
        }
    }
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

/// Lists and cross-checks the frame files of a sequence.
pub fn discover_frames(layout: &SequenceLayout) -> Result<FrameFiles> {
    let rgb = list_frames(&layout.rgb_dir(), &RGB_EXTENSIONS)?;
    let depth = list_frames(&layout.depth_dir(), &["png"])?;
    if rgb.len() != depth.len() {
        return Err(Error::Sequence {
            path: layout.root.clone(),
            reason: format!("{} rgb frames but {} depth frames", rgb.len(), depth.len()),
        });
    }
    if rgb.is_empty() {
        return Err(Error::Sequence {
            path: layout.root.clone(),
            reason: "sequence has no frames".into(),
        });
    }
    Ok(FrameFiles { rgb, depth })
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?.into_rgb8();
    let (w, h) = img.dimensions();
    RgbImage::new(w as usize, h as usize, img.into_raw())
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    image::save_buffer(
        path,
        img.data(),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::Rgb8,
    )
    .map_err(|e| Error::image(path, e))
}

/// Meters to stored units; VOID maps to 0. Returns the number of saturated
/// pixels alongside the encoded buffer.
pub fn encode_depth(d: &DepthMap, scale: f64) -> (Vec<u16>, usize) {
    let mut saturated = 0;
    let data = d
        .data()
        .iter()
        .map(|&m| {
            if m == VOID {
                return 0;
            }
            let v = (m as f64 * scale).round();
            if v > u16::MAX as f64 {
                saturated += 1;
                u16::MAX
            } else {
                v as u16
            }
        })
        .collect();
    (data, saturated)
}

pub fn decode_depth(width: usize, height: usize, stored: &[u16], scale: f64) -> Result<DepthMap> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Parameter(format!("depth scale must be positive, got {scale}")));
    }
    let data = stored
        .iter()
        .map(|&v| if v == 0 { VOID } else { (v as f64 / scale) as f32 })
        .collect();
    DepthMap::new(width, height, data)
}

pub fn read_depth(path: &Path, scale: f64) -> Result<DepthMap> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    let image::DynamicImage::ImageLuma16(buf) = img else {
        return Err(Error::Sequence {
            path: path.to_path_buf(),
            reason: format!("depth frames must be 16-bit single channel, found {:?}", img.color()),
        });
    };
    let (w, h) = buf.dimensions();
    decode_depth(w as usize, h as usize, buf.as_raw(), scale)
}

pub fn write_depth(path: &Path, d: &DepthMap, scale: f64) -> Result<()> {
    let (data, saturated) = encode_depth(d, scale);
    if saturated > 0 {
        log::warn!(
            "{}: {saturated} depth pixels exceed the 16-bit range at scale {scale} and were saturated",
            path.display()
        );
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(d.width() as u32, d.height() as u32, data).expect("buffer matches dimensions");
    buf.save(path).map_err(|e| Error::image(path, e))
}

/// Parses `timestamp tx ty tz qx qy qz qw` lines; `#` starts a comment.
pub fn parse_trajectory(text: &str, path: &Path) -> Result<Trajectory> {
    let bad = |line: usize, reason: String| Error::Sequence {
        path: path.to_path_buf(),
        reason: format!("line {line}: {reason}"),
    };
    let mut poses = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(n + 1, e.to_string()))?;
        if values.len() != 8 {
            return Err(bad(n + 1, format!("expected 8 values, found {}", values.len())));
        }
        let pose = Pose::from_components(
            values[0],
            [values[1], values[2], values[3]],
            [values[7], values[4], values[5], values[6]],
        )
        .map_err(|e| bad(n + 1, e.to_string()))?;
        poses.push(pose);
    }
    Trajectory::new(poses).map_err(|e| Error::Sequence {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text, path)
}

/// Shortest round-trip formatting, so reading back is exact.
pub fn format_trajectory(poses: &[Pose]) -> String {
    let mut out = String::from("# timestamp tx ty tz qx qy qz qw\n");
    for p in poses {
        let q = p.rotation.quaternion();
        let t = p.translation;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            p.timestamp, t.x, t.y, t.z, q.i, q.j, q.k, q.w
        );
    }
    out
}

pub fn write_trajectory(path: &Path, poses: &[Pose]) -> Result<()> {
    fs::write(path, format_trajectory(poses)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub rgb: Vec<RgbImage>,
    pub depth: Vec<DepthMap>,
    pub trajectory: Trajectory,
}

pub fn load_sequence(layout: &SequenceLayout) -> Result<Sequence> {
    let files = discover_frames(layout)?;
    let trajectory = read_trajectory(&layout.trajectory_path())?;
    if trajectory.len() != files.len() {
        return Err(Error::Sequence {
            path: layout.root.clone(),
            reason: format!("{} frames but {} trajectory poses", files.len(), trajectory.len()),
        });
    }
    let rgb = files
        .rgb
        .par_iter()
        .enumerate()
        .map(|(i, p)| read_rgb(p).map_err(|e| e.at_frame(i)))
        .collect::<Result<Vec<_>>>()?;
    let depth = files
        .depth
        .par_iter()
        .enumerate()
        .map(|(i, p)| read_depth(p, layout.depth_scale).map_err(|e| e.at_frame(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sequence { rgb, depth, trajectory })
}

pub fn save_sequence(seq: &Sequence, layout: &SequenceLayout) -> Result<()> {
    if seq.rgb.len() != seq.depth.len() || seq.rgb.len() != seq.trajectory.len() {
        return Err(Error::Parameter(format!(
            "streams are not aligned: {} rgb, {} depth, {} poses",
            seq.rgb.len(),
            seq.depth.len(),
            seq.trajectory.len()
        )));
    }
    layout.create_dirs()?;
    seq.rgb
        .par_iter()
        .zip(&seq.depth)
        .enumerate()
        .try_for_each(|(i, (rgb, depth))| {
            write_rgb(&layout.rgb_path(i), rgb)
                .and_then(|_| write_depth(&layout.depth_path(i), depth, layout.depth_scale))
                .map_err(|e| e.at_frame(i))
        })?;
    write_trajectory(&layout.trajectory_path(), seq.trajectory.poses())
}
