//! Recipe validation and end-to-end sequence perturbation.
//!
//! Stages run in the order motion deviation, downsampling, RGB imaging,
//! depth imaging, desynchronization. Imaging stages of the same stream
//! compose in recipe order.

pub mod config;
pub mod presets;
pub mod run;

pub use config::{
    DesyncStage, DownsampleStage, ImagingOp, ImagingStage, MotionStage, PipelineConfig, Plan, StageConfig,
};
pub use presets::{all_presets, benchmark_presets, find_preset, mixture_preset, Preset};
pub use run::{run, sha256_file, FrameRecord, Manifest, RunOptions, StageRecord};
