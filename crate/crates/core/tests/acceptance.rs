//! Acceptance checks. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Matrix4, Rotation3, UnitQuaternion, Vector3};
use noisy_rgbd::dataset_io::{self, save_sequence, SequenceLayout};
use noisy_rgbd::desync::{desync_pairs, DesyncSpec, INTERVAL_PRESETS};
use noisy_rgbd::depth::{depth_gaussian_noise, depth_random_missing, depth_range_clip};
use noisy_rgbd::eval::{self, AlignmentKind, MeshOptions, PointCloudPair, PosePairs};
use noisy_rgbd::motion::{
    motion_statistics, perturb_trajectory, smooth_trajectory, DeviationSpec, ROTATION_STD_PRESETS,
    TRANSLATION_STD_PRESETS,
};
use noisy_rgbd::pipeline::{self, all_presets, mixture_preset, PipelineConfig, RunOptions};
use noisy_rgbd::rgb::apply_rgb_level;
use noisy_rgbd::rng::RngKey;
use noisy_rgbd::severity::{table_markdown, RgbKind, SeverityLevel};
use noisy_rgbd::synthetic::synthetic_sequence;
use noisy_rgbd::types::{DepthMap, Mode, Pose, RgbImage, VOID};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn level(n: u8) -> SeverityLevel {
    SeverityLevel::new(n).unwrap()
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic")
}

// Configuration tables as printed, one row per kind, cells separated by '|'.
const RGB_TABLE: &[(&str, &str)] = &[
    ("rgb:snow", "0.1,0.3,3.0,0.5,10.0,4.0,0.8 | 0.2,0.3,2,0.5,12,4,0.7 | 0.55,0.3,4,0.9,12,8,0.7 | 0.55,0.3,4.5,0.85,12,8,0.65 | 0.55,0.3,2.5,0.85,12,12,0.55"),
    ("rgb:frost", "1.00,0.40 | 0.80,0.60 | 0.70,0.70 | 0.65,0.70 | 0.60,0.75"),
    ("rgb:fog", "1.5,2.0 | 2.0,2.0 | 2.5,1.7 | 2.5,1.5 | 3.0,1.4"),
    ("rgb:spatter", "0.65,0.3,4,0.69,0.6,0 | 0.65,0.3,3,0.68,0.6,0 | 0.65,0.3,2,0.68,0.5,0 | 0.65,0.3,1,0.65,1.5,1 | 0.67,0.4,1,0.65,1.5,1"),
    ("rgb:defocus_blur", "3.0,0.1 | 4.0,0.5 | 6.0,0.5 | 8.0,0.5 | 10.0,0.5"),
    ("rgb:glass_blur", "0.7,1.0,2.0 | 0.9,2.0,1.0 | 1.0,2.0,3.0 | 1.1,3.0,2.0 | 1.5,4.0,2.0"),
    ("rgb:motion_blur", "10,3 | 15,5 | 15,8 | 15,12 | 20,15"),
    ("rgb:gaussian_blur", "1 | 2 | 3 | 4 | 6"),
    ("rgb:gaussian_noise", "0.08 | 0.12 | 0.18 | 0.26 | 0.38"),
    ("rgb:shot_noise", "60 | 25 | 12 | 5 | 3"),
    ("rgb:impulse_noise", "0.03 | 0.06 | 0.09 | 0.17 | 0.27"),
    ("rgb:speckle_noise", "0.15 | 0.2 | 0.35 | 0.45 | 0.6"),
    ("rgb:brightness", "0.1 | 0.2 | 0.3 | 0.4 | 0.5"),
    ("rgb:contrast", "0.40 | 0.30 | 0.20 | 0.10 | 0.05"),
    ("rgb:jpeg", "25 | 18 | 15 | 10 | 7"),
    ("rgb:pixelate", "0.60 | 0.50 | 0.40 | 0.30 | 0.25"),
];

const DEPTH_TABLE: &[(&str, &str)] = &[
    ("depth:gaussian_noise", "0.1 | 0.2 | 0.3 | 0.4 | 0.5"),
    ("depth:edge_erosion", "0.015 | 0.020 | 0.025 | 0.03 | 0.035"),
    ("depth:random_missing", "10 | 15 | 20 | 25 | 30"),
    ("depth:range_clip", "0.2,4.4 | 0.3,4.2 | 0.4,4.0 | 0.5,3.8 | 0.6,3.6"),
];

fn parse_cells(s: &str) -> Vec<Vec<f64>> {
    s.split('|')
        .map(|cell| {
            cell.split(',')
                .map(|v| v.trim().parse::<f64>().expect("oracle cell"))
                .collect()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let dump = table_markdown();
    let mut rows: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for line in dump.lines().filter(|l| l.starts_with("| rgb:") || l.starts_with("| depth:")) {
        let cols: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
        let cells = cols[3..]
            .iter()
            .map(|c| c.split(", ").map(|v| v.parse::<f64>().map_err(|e| format!("{line}: {e}"))).collect())
            .collect::<Result<Vec<Vec<f64>>, String>>()?;
        rows.insert(cols[0].to_string(), cells);
    }
    let mut checked = 0;
    for (key, expected) in RGB_TABLE.iter().chain(DEPTH_TABLE) {
        let got = rows.get(*key).ok_or(format!("{key} missing from dump"))?;
        let want = parse_cells(expected);
        check(got.len() == 5, format!("{key}: {} levels", got.len()))?;
        for (lvl, (g, w)) in got.iter().zip(&want).enumerate() {
            check(g == w, format!("{key} level {}: dump {g:?}, table {w:?}", lvl + 1))?;
            checked += 1;
        }
    }
    check(rows.len() == 20, format!("dump has {} rows, expected 20", rows.len()))?;
    Ok(format!("{checked} of 100 cells match ({} RGB rows, {} depth rows)", RGB_TABLE.len(), DEPTH_TABLE.len()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let d = DepthMap::filled(1200, 680, 2.5);
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    for seed in 0..20 {
        let out = depth_random_missing(&d, level(3), RngKey::new(seed, "missing").with_op(1))
            .map_err(|e| e.to_string())?;
        let f = out.void_fraction();
        lo = lo.min(f);
        hi = hi.max(f);
        check((0.19..=0.21).contains(&f), format!("seed {seed}: void fraction {f:.4}"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("void fraction in [{lo:.4}, {hi:.4}] over 20 seeds, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let (w, h) = (501, 7);
    let ramp: Vec<f32> = (0..h).flat_map(|_| (0..w).map(|x| x as f32 * 0.01)).collect();
    let d = DepthMap::new(w, h, ramp.clone()).map_err(|e| e.to_string())?;
    let out = depth_range_clip(&d, level(3));
    let (min, max) = (0.4f32, 4.0f32);
    let mut voids = 0;
    for (i, (&src, &got)) in ramp.iter().zip(out.data()).enumerate() {
        let expect_void = src == VOID || src < min || src > max;
        check(
            (got == VOID) == expect_void,
            format!("pixel {i} at {src} m: got {got}"),
        )?;
        if !expect_void {
            check(got == src, format!("pixel {i} changed from {src} to {got}"))?;
        }
        voids += usize::from(expect_void);
    }
    Ok(format!("{voids} of {} ramp pixels voided, all as predicted", ramp.len()))
}

fn std_of(v: impl Iterator<Item = f64>) -> f64 {
    let (mut n, mut s, mut s2) = (0.0, 0.0, 0.0);
    for x in v {
        n += 1.0;
        s += x;
        s2 += x * x;
    }
    (s2 / n - (s / n).powi(2)).sqrt()
}

fn criterion_4() -> Outcome {
    let (w, h) = (1000, 1000);
    let img = RgbImage::filled(w, h, [128, 128, 128]);
    let base = 128.0 / 255.0;
    let key = RngKey::new(11, "noise").with_op(3);

    let noisy = apply_rgb_level(&img, RgbKind::GaussianNoise, level(1), key).map_err(|e| e.to_string())?;
    let rgb_std = std_of(noisy.data().iter().map(|&v| v as f64 / 255.0 - base));
    check((rgb_std / 0.08 - 1.0).abs() <= 0.05, format!("rgb gaussian std {rgb_std:.5}"))?;

    let d = DepthMap::filled(w, h, 3.0);
    let noisy = depth_gaussian_noise(&d, level(1), key);
    let depth_std = std_of(noisy.data().iter().map(|&v| v as f64 - 3.0));
    check((depth_std / 0.1 - 1.0).abs() <= 0.05, format!("depth gaussian std {depth_std:.5}"))?;

    let half = RgbImage::filled(w, h, [128, 128, 128]);
    let speckled = apply_rgb_level(&half, RgbKind::SpeckleNoise, level(1), key).map_err(|e| e.to_string())?;
    let sp_std = std_of(speckled.data().iter().map(|&v| v as f64 / 255.0));
    let expected = 0.15 * base;
    check((sp_std / expected - 1.0).abs() <= 0.05, format!("speckle std {sp_std:.5} vs {expected:.5}"))?;

    Ok(format!(
        "rgb gaussian std {rgb_std:.5} (0.08), depth std {depth_std:.5} (0.1), speckle std {sp_std:.5} ({expected:.5}), 3e6/1e6/3e6 samples"
    ))
}

fn dir_digests(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, pipeline::sha256_file(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn criterion_5(tmp: &Path) -> Outcome {
    let n = 40;
    let input = tmp.join("desync_input");
    save_sequence(&synthetic_sequence(n, 32, 24), &SequenceLayout::new(&input)).map_err(|e| e.to_string())?;
    let in_layout = SequenceLayout::new(&input);
    for delta in INTERVAL_PRESETS {
        let out = tmp.join(format!("desync_{delta}"));
        let cfg = PipelineConfig {
            input: Some(input.clone()),
            output: Some(out.clone()),
            ..PipelineConfig::from_toml(&format!("[[stages]]\nstage = \"desync\"\ninterval = {delta}\n")).unwrap()
        };
        let m = pipeline::run(&cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
        check(m.output_frames == n - delta as usize, format!("delta {delta}: {} frames", m.output_frames))?;
        let out_layout = SequenceLayout::new(&out);
        for t in 0..m.output_frames {
            let rgb_in = pipeline::sha256_file(&in_layout.rgb_path(t)).unwrap();
            let depth_in = pipeline::sha256_file(&in_layout.depth_path(t + delta as usize)).unwrap();
            check(
                pipeline::sha256_file(&out_layout.rgb_path(t)).unwrap() == rgb_in,
                format!("delta {delta}: rgb {t} differs"),
            )?;
            check(
                pipeline::sha256_file(&out_layout.depth_path(t)).unwrap() == depth_in,
                format!("delta {delta}: depth {t} is not input depth {}", t + delta as usize),
            )?;
        }
        let poses_in = dataset_io::read_trajectory(&in_layout.trajectory_path()).unwrap();
        let poses_out = dataset_io::read_trajectory(&out_layout.trajectory_path()).unwrap();
        check(
            poses_out.poses() == &poses_in.poses()[..m.output_frames],
            format!("delta {delta}: pose labels moved"),
        )?;
    }

    let mut worst = 0.0f64;
    for delta in INTERVAL_PRESETS {
        let frames = 10_000;
        let spec = DesyncSpec::new(delta, Mode::Dynamic);
        let pairs = desync_pairs(frames + delta as usize, &spec, RngKey::new(5, "dyn").with_op(2))
            .map_err(|e| e.to_string())?;
        check(pairs.len() == frames, format!("dynamic delta {delta}: {} pairs", pairs.len()))?;
        let mut counts = [0usize; 3];
        for p in &pairs {
            let off = p.offset() - delta as isize;
            check((-1..=1).contains(&off), format!("dynamic delta {delta}: offset {}", p.offset()))?;
            counts[(off + 1) as usize] += 1;
        }
        for c in counts {
            let dev = (c as f64 / frames as f64 - 1.0 / 3.0).abs();
            worst = worst.max(dev);
            check(dev <= 0.02, format!("dynamic delta {delta}: frequencies {counts:?}"))?;
        }
    }
    Ok(format!(
        "static pairs verified by digest for delta 5/10/20 on {n} frames; dynamic max |freq - 1/3| = {worst:.4}"
    ))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
    let axis = Vector3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    Rotation3::from_scaled_axis(axis.normalize() * rng.random_range(0.0..std::f64::consts::PI))
}

fn random_poses(rng: &mut ChaCha8Rng, n: usize) -> Vec<Pose> {
    (0..n)
        .map(|i| {
            let t = Vector3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            Pose::new(i as f64 * 0.05, UnitQuaternion::from_rotation_matrix(&random_rotation(rng)), t)
        })
        .collect()
}

fn transform_poses(poses: &[Pose], r: &Rotation3<f64>, t: &Vector3<f64>, s: f64) -> Vec<Pose> {
    let q = UnitQuaternion::from_rotation_matrix(r);
    poses
        .iter()
        .map(|p| Pose::new(p.timestamp, q * p.rotation, s * (r * p.translation) + t))
        .collect()
}

/// RMSE after optimal translation (and scale) for a fixed rotation `r`.
fn residual(gt: &[Vector3<f64>], est: &[Vector3<f64>], r: &Matrix3<f64>, with_scale: bool) -> f64 {
    let n = gt.len() as f64;
    let mg = gt.iter().sum::<Vector3<f64>>() / n;
    let me = est.iter().sum::<Vector3<f64>>() / n;
    let s = if with_scale {
        let num: f64 = gt.iter().zip(est).map(|(g, e)| (g - mg).dot(&(r * (e - me)))).sum();
        let den: f64 = est.iter().map(|e| (e - me).norm_squared()).sum();
        (num / den).max(1e-12)
    } else {
        1.0
    };
    let sse: f64 = gt.iter().zip(est).map(|(g, e)| ((g - mg) - s * r * (e - me)).norm_squared()).sum();
    (sse / n).sqrt()
}

/// Grid search over Euler angles followed by a shrinking pattern search on
/// small rotations about each axis.
fn brute_force_ate(gt: &[Vector3<f64>], est: &[Vector3<f64>], with_scale: bool) -> f64 {
    use std::f64::consts::PI;
    let steps = 24;
    let mut best = (f64::INFINITY, Matrix3::identity());
    for i in 0..steps {
        for j in 0..=steps / 2 {
            for k in 0..steps {
                let r = Rotation3::from_euler_angles(
                    -PI + 2.0 * PI * i as f64 / steps as f64,
                    -PI / 2.0 + PI * j as f64 / (steps / 2) as f64,
                    -PI + 2.0 * PI * k as f64 / steps as f64,
                )
                .into_inner();
                let f = residual(gt, est, &r, with_scale);
                if f < best.0 {
                    best = (f, r);
                }
            }
        }
    }
    let (mut f, mut r) = best;
    let mut step = 0.2;
    while step > 1e-10 {
        let mut improved = false;
        for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
            for sign in [-1.0, 1.0] {
                let cand = Rotation3::from_scaled_axis(axis * sign * step).into_inner() * r;
                let fc = residual(gt, est, &cand, with_scale);
                if fc < f {
                    (f, r) = (fc, cand);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    f
}

fn homogeneous(p: &Pose) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&p.rotation_matrix());
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&p.translation);
    m
}

fn brute_force_rpe(gt: &[Pose], est: &[Pose], delta: usize) -> (f64, f64) {
    let (mut st, mut sr) = (0.0, 0.0);
    let count = gt.len() - delta;
    for i in 0..count {
        let g = homogeneous(&gt[i]).try_inverse().unwrap() * homogeneous(&gt[i + delta]);
        let e = homogeneous(&est[i]).try_inverse().unwrap() * homogeneous(&est[i + delta]);
        let err = g.try_inverse().unwrap() * e;
        st += err.fixed_view::<3, 1>(0, 3).norm_squared();
        let tr = err[(0, 0)] + err[(1, 1)] + err[(2, 2)];
        sr += ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos().to_degrees().powi(2);
    }
    ((st / count as f64).sqrt(), (sr / count as f64).sqrt())
}

fn brute_force_mesh(p: &[[f64; 3]], q: &[[f64; 3]], t: f64) -> (f64, f64, f64) {
    let dist = |a: &[f64; 3], b: &[f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let nn = |a: &[f64; 3], set: &[[f64; 3]]| set.iter().map(|b| dist(a, b)).fold(f64::INFINITY, f64::min);
    let acc = p.iter().map(|a| nn(a, q)).sum::<f64>() / p.len() as f64;
    let d: Vec<f64> = q.iter().map(|a| nn(a, p)).collect();
    let comp = d.iter().sum::<f64>() / d.len() as f64;
    (acc, comp, 100.0 * d.iter().filter(|&&x| x < t).count() as f64 / d.len() as f64)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa7e);
    let mut worst_ate = 0.0f64;
    let mut worst_rpe = 0.0f64;
    let mut worst_mesh = 0.0f64;
    let mut worst_exact = 0.0f64;
    let noise = |rng: &mut ChaCha8Rng, s: f64| {
        Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ) * s
    };

    for instance in 0..100 {
        let gt = random_poses(&mut rng, 10);
        let r0 = random_rotation(&mut rng);
        let t0 = Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let sim = instance % 2 == 1;
        let s0 = if sim { rng.random_range(0.3..3.0) } else { 1.0 };
        let mut est = transform_poses(&gt, &r0, &t0, s0);
        for p in &mut est {
            p.translation += noise(&mut rng, 0.05);
        }
        let kind = if sim { AlignmentKind::Sim3 } else { AlignmentKind::Se3 };
        let pairs = PosePairs::new(gt.clone(), est.clone()).unwrap();
        let a = eval::align(&pairs, kind).map_err(|e| e.to_string())?;
        let ate = eval::ate(&pairs, &a);
        let gp: Vec<Vector3<f64>> = gt.iter().map(|p| p.translation).collect();
        let ep: Vec<Vector3<f64>> = est.iter().map(|p| p.translation).collect();
        let oracle = brute_force_ate(&gp, &ep, sim);
        worst_ate = worst_ate.max((ate - oracle).abs());
        check((ate - oracle).abs() < 1e-4, format!("instance {instance}: ate {ate} vs oracle {oracle}"))?;
        check(
            (a.rotation.determinant() - 1.0).abs() < 1e-9
                && (a.rotation.transpose() * a.rotation - Matrix3::identity()).norm() < 1e-9,
            format!("instance {instance}: rotation not orthonormal"),
        )?;

        // exact constructed transforms are recovered
        let clean = transform_poses(&gt, &r0, &t0, s0);
        let clean_pairs = PosePairs::new(gt.clone(), clean.clone()).unwrap();
        let ac = eval::align(&clean_pairs, kind).map_err(|e| e.to_string())?;
        let exact = eval::ate(&clean_pairs, &ac);
        worst_exact = worst_exact.max(exact);
        check(exact < 1e-9, format!("instance {instance}: constructed transform residual {exact}"))?;
        if sim {
            check((ac.scale - 1.0 / s0).abs() < 1e-9, format!("instance {instance}: scale {}", ac.scale))?;
        }

        // RPE against the homogeneous-matrix oracle, and its rigid invariance
        let mut est_rpe = gt.clone();
        for p in &mut est_rpe {
            p.translation += noise(&mut rng, 0.02);
            p.rotation = UnitQuaternion::from_scaled_axis(noise(&mut rng, 0.01)) * p.rotation;
        }
        let delta = 1 + instance % 3;
        let rp = PosePairs::new(gt.clone(), est_rpe.clone()).unwrap();
        let (rt, rr) = eval::rpe(&rp, delta).map_err(|e| e.to_string())?;
        let (ot, or) = brute_force_rpe(&gt, &est_rpe, delta);
        worst_rpe = worst_rpe.max((rt - ot).abs()).max((rr - or).abs());
        check((rt - ot).abs() < 1e-4 && (rr - or).abs() < 1e-4, format!("instance {instance}: rpe ({rt}, {rr}) vs ({ot}, {or})"))?;
        let moved = transform_poses(&est_rpe, &r0, &t0, 1.0);
        let (mt, mr) = eval::rpe(&PosePairs::new(gt.clone(), moved.clone()).unwrap(), delta).unwrap();
        check((mt - rt).abs() < 1e-9 && (mr - rr).abs() < 1e-9, format!("instance {instance}: rpe not rigid-invariant"))?;

        // ATE (SE3) invariance to a rigid transform of the estimate, and self-error
        let se3 = |est: &[Pose]| {
            let p = PosePairs::new(gt.clone(), est.to_vec()).unwrap();
            eval::ate(&p, &eval::align(&p, AlignmentKind::Se3).unwrap())
        };
        let base = se3(&est_rpe);
        check((se3(&moved) - base).abs() < 1e-9, format!("instance {instance}: ate not rigid-invariant"))?;
        let selfp = PosePairs::new(gt.clone(), gt.clone()).unwrap();
        check(eval::ate(&selfp, &eval::align(&selfp, AlignmentKind::Se3).unwrap()) < 1e-9, "ate(x, x) != 0")?;
        check(eval::ate(&selfp, &eval::Alignment::identity()) == 0.0, "ate(x, x) != 0 without alignment")?;
        let (zt, zr) = eval::rpe(&selfp, 1).unwrap();
        check(zt < 1e-9 && zr < 1e-6, format!("rpe(x, x) = ({zt}, {zr})"))?;

        // mesh metrics against the exhaustive double loop
        let np = rng.random_range(1..=1000);
        let nq = rng.random_range(1..=1000);
        let cloud = |rng: &mut ChaCha8Rng, n: usize| -> Vec<[f64; 3]> {
            (0..n).map(|_| [rng.random(), rng.random(), rng.random::<f64>() * 0.5]).collect()
        };
        let p = cloud(&mut rng, np);
        let q = cloud(&mut rng, nq);
        let m = eval::mesh_metrics(&PointCloudPair { p: p.clone(), q: q.clone() }, MeshOptions::new(0.05))
            .map_err(|e| e.to_string())?;
        let (acc, comp, ratio) = brute_force_mesh(&p, &q, 0.05);
        let dev = (m.accuracy - acc).abs().max((m.completion - comp).abs()).max((m.completion_ratio - ratio).abs());
        worst_mesh = worst_mesh.max(dev);
        check(dev < 1e-4, format!("instance {instance}: mesh deviation {dev}"))?;
    }
    Ok(format!(
        "100 instances: max |ATE - oracle| {worst_ate:.2e}, max RPE dev {worst_rpe:.2e}, max mesh dev {worst_mesh:.2e}, constructed-transform residual {worst_exact:.2e}"
    ))
}

fn run_preset(cfg: &PipelineConfig, input: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let mut cfg = cfg.clone();
    cfg.input = Some(input.to_path_buf());
    cfg.output = Some(out.to_path_buf());
    pipeline::run(&cfg, &RunOptions { threads: Some(threads) })
        .map(|_| ())
        .map_err(|e| e.to_string())
}

fn criterion_7(tmp: &Path) -> Outcome {
    let start = Instant::now();
    let input = fixture_dir();
    let presets = all_presets();
    let mut files = 0;
    for p in &presets {
        let runs = [("a", 1), ("b", 1), ("c", 8)];
        let mut digests = Vec::new();
        for (tag, threads) in runs {
            let out = tmp.join("determinism").join(&p.name).join(tag);
            run_preset(&p.config, &input, &out, threads).map_err(|e| format!("{}: {e}", p.name))?;
            digests.push(dir_digests(&out)?);
        }
        check(digests[0] == digests[1], format!("{}: repeated runs differ", p.name))?;
        check(digests[0] == digests[2], format!("{}: 1 vs 8 workers differ", p.name))?;
        files += digests[0].len();
        fs::remove_dir_all(tmp.join("determinism").join(&p.name)).ok();
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(600), format!("sweep took {elapsed:?}"))?;
    Ok(format!(
        "{} presets x 3 runs byte-identical ({files} files per pass), {:.1}s",
        presets.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_8(tmp: &Path) -> Outcome {
    let input = fixture_dir();
    let mix = mixture_preset();
    mix.config.validate().map_err(|e| e.to_string())?;
    let out = tmp.join("mix_full");
    let mut cfg = mix.config.clone();
    cfg.input = Some(input.clone());
    cfg.output = Some(out.clone());
    let manifest = pipeline::run(&cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
    let expected = [
        "rgb:snow",
        "rgb:motion_blur",
        "rgb:gaussian_noise",
        "rgb:jpeg",
        "depth:gaussian_noise",
        "desync",
    ];
    check(manifest.stage_names() == expected, format!("manifest stages {:?}", manifest.stage_names()))?;
    let full = dir_digests(&out)?;

    for i in 0..expected.len() {
        let mut disabled = mix.config.clone();
        disabled.stages[i].set_enabled(false);
        let mut removed = mix.config.clone();
        removed.stages.remove(i);
        let a = tmp.join(format!("mix_disabled_{i}"));
        let b = tmp.join(format!("mix_removed_{i}"));
        run_preset(&disabled, &input, &a, 4)?;
        run_preset(&removed, &input, &b, 4)?;
        let (da, db) = (dir_digests(&a)?, dir_digests(&b)?);
        check(da == db, format!("disabling {} differs from the five-stage recipe", expected[i]))?;
        check(da != full, format!("disabling {} had no effect", expected[i]))?;
    }
    Ok(format!(
        "six stages recorded in order ({}), each disabled run equals its five-stage recipe",
        expected.join(" -> ")
    ))
}

fn criterion_9() -> Outcome {
    let traj = smooth_trajectory(400, 20.0);
    let stats = |r: f64, t: f64| -> (f64, f64) {
        let spec = DeviationSpec::new(r, t).unwrap();
        let mut acc = (0.0, 0.0);
        for seed in 0..3 {
            let p = perturb_trajectory(&traj, &spec, RngKey::new(seed, "trend").with_op(1));
            let s = motion_statistics(&p, 20.0).unwrap();
            acc.0 += s.mean_translation_speed / 3.0;
            acc.1 += s.mean_rotation_speed / 3.0;
        }
        acc
    };
    let grid: Vec<Vec<(f64, f64)>> = ROTATION_STD_PRESETS
        .iter()
        .map(|&r| TRANSLATION_STD_PRESETS.iter().map(|&t| stats(r, t)).collect())
        .collect();
    for (i, row) in grid.iter().enumerate() {
        for j in 1..row.len() {
            check(
                row[j].0 >= row[j - 1].0,
                format!("translation speed drops at sigma_r {} sigma_t {}", ROTATION_STD_PRESETS[i], TRANSLATION_STD_PRESETS[j]),
            )?;
        }
    }
    for j in 0..TRANSLATION_STD_PRESETS.len() {
        for i in 1..grid.len() {
            check(
                grid[i][j].1 >= grid[i - 1][j].1,
                format!("rotation speed drops at sigma_r {} sigma_t {}", ROTATION_STD_PRESETS[i], TRANSLATION_STD_PRESETS[j]),
            )?;
        }
    }
    let last = grid.len() - 1;
    Ok(format!(
        "4x4 grid monotone; translation speed {:.3} -> {:.3} m/s, rotation speed {:.2} -> {:.2} deg/s",
        grid[0][0].0, grid[0][3].0, grid[0][0].1, grid[last][0].1
    ))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(u8, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "parameter-table fidelity", Box::new(criterion_1)),
        (2, "depth missing rate", Box::new(criterion_2)),
        (3, "range clipping exactness", Box::new(criterion_3)),
        (4, "noise statistics", Box::new(criterion_4)),
        (5, "desync contract", Box::new(|| criterion_5(tmp.path()))),
        (6, "metric oracles", Box::new(criterion_6)),
        (7, "determinism", Box::new(|| criterion_7(tmp.path()))),
        (8, "composition", Box::new(|| criterion_8(tmp.path()))),
        (9, "motion statistics trend", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
