use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use noisy_rgbd::dataset_io::{self, save_sequence, SequenceLayout};
use noisy_rgbd::eval::{self, AlignmentKind, EvalOptions, EvalReport, MeshOptions, PointCloudPair};
use noisy_rgbd::motion::{motion_statistics, DEFAULT_FRAME_RATE};
use noisy_rgbd::pipeline::{self, presets, PipelineConfig, RunOptions};
use noisy_rgbd::severity::{self, SeverityLevel};
use noisy_rgbd::synthetic;
use noisy_rgbd::{Error, Result};

const THREADS_ENV: &str = "NOISY_RGBD_THREADS";

#[derive(Parser)]
#[command(name = "noisy-rgbd", version, about = "Perturb RGB-D SLAM sequences and evaluate trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlignArg {
    None,
    Se3,
    Sim3,
}

impl From<AlignArg> for AlignmentKind {
    fn from(a: AlignArg) -> Self {
        match a {
            AlignArg::None => AlignmentKind::None,
            AlignArg::Se3 => AlignmentKind::Se3,
            AlignArg::Sim3 => AlignmentKind::Sim3,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Apply a perturbation recipe to a sequence
    Perturb {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the recipe seed
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the recipe input sequence
        #[arg(long)]
        input: Option<PathBuf>,
        /// Overrides the recipe output directory
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the manifest here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ATE, RPE and success rate of an estimated trajectory
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        est: PathBuf,
        #[arg(long, value_enum, default_value = "se3")]
        alignment: AlignArg,
        /// RPE frame offset
        #[arg(long, default_value_t = 1)]
        delta: usize,
        /// Association tolerance in seconds
        #[arg(long, default_value_t = eval::DEFAULT_MAX_DT)]
        max_dt: f64,
        /// Report failed or missing estimates as ATE = RPE = 1.0, SR = 0
        #[arg(long)]
        cap_failures: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy, completion and completion ratio between two XYZ point clouds
    MeshEval {
        /// Reconstructed points
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth points
        #[arg(long)]
        gt: PathBuf,
        /// Completion-ratio threshold in meters
        #[arg(long, default_value_t = eval::mesh::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Average squared distances instead of distances
        #[arg(long)]
        squared: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Speed and acceleration statistics of a trajectory
    Stats {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FRAME_RATE)]
        fps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a recipe without running it
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print severity parameters, all tables or one kind and level
    Params {
        /// e.g. rgb:snow or depth:range_clip
        #[arg(long, requires = "level")]
        kind: Option<String>,
        #[arg(long)]
        level: Option<u8>,
    },
    /// List the benchmark recipes or write them as TOML files
    Presets {
        /// Directory to write recipes into
        #[arg(long)]
        write: Option<PathBuf>,
        /// Input sequence recorded in written recipes
        #[arg(long, requires = "write")]
        input: Option<PathBuf>,
        /// Output root recorded in written recipes; each recipe gets a subdirectory
        #[arg(long, requires = "write")]
        output_root: Option<PathBuf>,
    },
    /// Write the procedural test sequence
    Fixture {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = synthetic::FIXTURE_FRAMES)]
        frames: usize,
        #[arg(long, default_value_t = synthetic::FIXTURE_WIDTH)]
        width: usize,
        #[arg(long, default_value_t = synthetic::FIXTURE_HEIGHT)]
        height: usize,
    },
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn perturb(
    config: &Path,
    seed: Option<u64>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    out: Option<&Path>,
) -> Result<()> {
    let mut cfg = PipelineConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if input.is_some() {
        cfg.input = input;
    }
    if output.is_some() {
        cfg.output = output;
    }
    let opts = RunOptions { threads: threads_from_env()? };
    let manifest = pipeline::run(&cfg, &opts)?;
    println!(
        "wrote {} of {} frames to {}",
        manifest.output_frames,
        manifest.input_frames,
        cfg.output.as_deref().unwrap_or(Path::new("")).display()
    );
    let names = manifest.stage_names();
    println!("stages: {}", if names.is_empty() { "none".into() } else { names.join(" -> ") });
    write_json(out, &manifest)
}

fn evaluate(gt: &Path, est: &Path, opts: EvalOptions, out: Option<&Path>) -> Result<()> {
    let gt = dataset_io::read_trajectory(gt)?;
    let report = match dataset_io::read_trajectory(est) {
        Ok(est) => eval::evaluate(gt.poses(), est.poses(), &opts)?,
        Err(e) if opts.cap_failures => {
            log::warn!("no usable estimate ({e}); reporting capped values");
            EvalReport::failure(opts.alignment)
        }
        Err(e) => return Err(e),
    };
    println!("{report}");
    write_json(out, &report)
}

fn mesh_eval(pred: &Path, gt: &Path, opts: MeshOptions, out: Option<&Path>) -> Result<()> {
    let pc = PointCloudPair {
        p: eval::read_xyz(pred)?,
        q: eval::read_xyz(gt)?,
    };
    let m = eval::mesh_metrics(&pc, opts)?;
    let unit = if opts.squared { "m^2" } else { "m" };
    println!("accuracy          {:.6} {unit}", m.accuracy);
    println!("completion        {:.6} {unit}", m.completion);
    println!("completion ratio  {:.2} % (threshold {} m)", m.completion_ratio, opts.threshold);
    write_json(out, &m)
}

fn stats(path: &Path, fps: f64, out: Option<&Path>) -> Result<()> {
    let traj = dataset_io::read_trajectory(path)?;
    let s = motion_statistics(&traj, fps)?;
    println!("poses                      {}", traj.len());
    println!("mean translation speed     {:.6} m/s", s.mean_translation_speed);
    println!("mean translation accel     {:.6} m/s^2", s.mean_translation_acceleration);
    println!("mean rotation speed        {:.6} deg/s", s.mean_rotation_speed);
    println!("mean rotation accel        {:.6} deg/s^2", s.mean_rotation_acceleration);
    write_json(out, &s)
}

fn validate(config: &Path) -> Result<()> {
    let cfg = PipelineConfig::load(config)?;
    let plan = cfg.validate()?;
    let names: Vec<String> = cfg
        .stages
        .iter()
        .filter(|s| s.enabled())
        .map(|s| match s {
            pipeline::StageConfig::Rgb(i) | pipeline::StageConfig::Depth(i) => {
                format!("{}:{}@{}", s.name(), i.kind, i.level)
            }
            other => other.name().to_string(),
        })
        .collect();
    if let Some(input) = cfg.input.as_deref().filter(|p| p.exists()) {
        let n = dataset_io::discover_frames(&SequenceLayout::new(input))?.len();
        let m = plan.check_length(n)?;
        println!("input has {n} frames, output will have {m}");
    }
    println!(
        "ok: {} stage(s){}",
        names.len(),
        if names.is_empty() { String::new() } else { format!(": {}", names.join(" -> ")) }
    );
    Ok(())
}

fn params(kind: Option<String>, level: Option<u8>) -> Result<()> {
    match (kind, level) {
        (Some(kind), Some(level)) => {
            let kind = severity::parse_imaging_kind(&kind)?;
            let level = SeverityLevel::new(level)?;
            println!("{kind} level {level}: {:?}", severity::severity_params(kind, level));
            println!("table values: {:?}", severity::raw_params(kind, level));
        }
        _ => print!("{}", severity::table_markdown()),
    }
    Ok(())
}

fn list_presets(write: Option<PathBuf>, input: Option<PathBuf>, output_root: Option<PathBuf>) -> Result<()> {
    match write {
        Some(dir) => {
            let n = presets::write_recipes(&dir, input.as_deref(), output_root.as_deref())?;
            println!("wrote {n} recipes to {}", dir.display());
        }
        None => {
            for p in presets::all_presets() {
                println!("{}", p.name);
            }
        }
    }
    Ok(())
}

fn fixture(output: &Path, frames: usize, width: usize, height: usize) -> Result<()> {
    if frames == 0 || width == 0 || height == 0 {
        return Err(Error::Parameter("fixture needs at least one frame and pixel".into()));
    }
    let seq = synthetic::synthetic_sequence(frames, width, height);
    save_sequence(&seq, &SequenceLayout::new(output))?;
    println!("wrote {frames} frames of {width}x{height} to {}", output.display());
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Perturb {
            config,
            seed,
            input,
            output,
            out,
        } => perturb(&config, seed, input, output, out.as_deref()),
        Command::Eval {
            gt,
            est,
            alignment,
            delta,
            max_dt,
            cap_failures,
            out,
        } => {
            let opts = EvalOptions {
                alignment: alignment.into(),
                rpe_delta: delta,
                max_dt,
                cap_failures,
            };
            evaluate(&gt, &est, opts, out.as_deref())
        }
        Command::MeshEval {
            pred,
            gt,
            threshold,
            squared,
            out,
        } => mesh_eval(&pred, &gt, MeshOptions { threshold, squared }, out.as_deref()),
        Command::Stats { trajectory, fps, out } => stats(&trajectory, fps, out.as_deref()),
        Command::Validate { config } => validate(&config),
        Command::Params { kind, level } => params(kind, level),
        Command::Presets {
            write,
            input,
            output_root,
        } => list_presets(write, input, output_root),
        Command::Fixture {
            output,
            frames,
            width,
            height,
        } => fixture(&output, frames, width, height),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let help = format!(
        "Perturbation kinds and severity tables:\n\n{}Environment:\n  {THREADS_ENV}  cap on worker threads for perturb\n",
        severity::table_markdown()
    );
    let matches = Cli::command().after_long_help(help).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
