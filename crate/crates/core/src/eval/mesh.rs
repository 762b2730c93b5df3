use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use kiddo::immutable::float::kdtree::ImmutableKdTree;
use kiddo::SquaredEuclidean;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.05;

pub type Point = [f64; 3];

/// Reconstructed cloud `p` and ground-truth cloud `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudPair {
    pub p: Vec<Point>,
    pub q: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeshOptions {
    pub threshold: f64,
    /// Average squared nearest-neighbour distances instead of distances.
    pub squared: bool,
}

impl MeshOptions {
    pub fn new(threshold: f64) -> Self {
        Self { threshold, squared: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshMetrics {
    /// Mean distance from `p` to its nearest point in `q`.
    pub accuracy: f64,
    /// Mean distance from `q` to its nearest point in `p`.
    pub completion: f64,
    /// Percentage of `q` within the threshold of `p`.
    pub completion_ratio: f64,
}

struct NearestIndex {
    tree: ImmutableKdTree<f64, u32, 3, 32>,
}

impl NearestIndex {
    fn new(points: &[Point]) -> Self {
        Self { tree: ImmutableKdTree::new_from_slice(points) }
    }

    fn squared_distances(&self, queries: &[Point]) -> Vec<f64> {
        queries
            .par_iter()
            .map(|q| self.tree.nearest_one::<SquaredEuclidean>(q).distance)
            .collect()
    }
}

pub fn mesh_metrics(pc: &PointCloudPair, opts: MeshOptions) -> Result<MeshMetrics> {
    if pc.p.is_empty() || pc.q.is_empty() {
        return Err(Error::InsufficientData(format!(
            "mesh metrics need non-empty clouds ({} reconstructed, {} ground-truth points)",
            pc.p.len(),
            pc.q.len()
        )));
    }
    if !(opts.threshold >= 0.0) {
        return Err(Error::Parameter(format!("threshold must be non-negative, got {}", opts.threshold)));
    }
    let p_to_q = NearestIndex::new(&pc.q).squared_distances(&pc.p);
    let q_to_p = NearestIndex::new(&pc.p).squared_distances(&pc.q);
    let term = |d2: f64| if opts.squared { d2 } else { d2.sqrt() };
    let mean = |v: &[f64]| v.iter().map(|&d| term(d)).sum::<f64>() / v.len() as f64;
    let limit = opts.threshold * opts.threshold;
    let within = q_to_p.iter().filter(|&&d2| d2 < limit).count();
    Ok(MeshMetrics {
        accuracy: mean(&p_to_q),
        completion: mean(&q_to_p),
        completion_ratio: 100.0 * within as f64 / q_to_p.len() as f64,
    })
}

/// ASCII XYZ: three numbers per line, extra columns ignored, `#` comments.
pub fn read_xyz(path: &Path) -> Result<Vec<Point>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut points = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
        let mut p = [0.0; 3];
        for v in &mut p {
            *v = it
                .next()
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Sequence {
                    path: path.to_path_buf(),
                    reason: format!("line {}: expected three coordinates", n + 1),
                })?;
        }
        points.push(p);
    }
    Ok(points)
}

pub fn write_xyz(path: &Path, points: &[Point]) -> Result<()> {
    let mut out = String::with_capacity(points.len() * 32);
    for p in points {
        out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
