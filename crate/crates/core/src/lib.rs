pub mod dataset_io;
pub mod depth;
pub mod desync;
pub mod error;
pub mod eval;
pub mod filter;
pub mod motion;
pub mod perturbation;
pub mod pipeline;
pub mod rgb;
pub mod rng;
pub mod severity;
pub mod synthetic;
pub mod types;

pub use error::{Error, Result};
