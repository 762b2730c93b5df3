//! The sixteen RGB imaging perturbations.
//!
//! Every operation works on the `[0, 1]` floating point form of the image,
//! clamps, and quantizes back to 8 bits. Stochastic kinds draw all their
//! randomness from the stream of the supplied [`RngKey`].

pub mod blur;
pub mod environment;
pub mod noise;
pub mod postprocess;

use crate::error::{Error, Result};
use crate::perturbation::{effective_level, PerturbationKind, PerturbationSpec};
use crate::rng::{derive_rng, RngKey};
use crate::severity::{severity_params, ImagingKind, Params, RgbCategory, RgbKind, SeverityLevel};
use crate::types::RgbImage;

fn check_group(kind: RgbKind, group: RgbCategory) -> Result<()> {
    if kind.category() != group {
        return Err(Error::Parameter(format!(
            "{kind} is not a {group:?} perturbation"
        )));
    }
    Ok(())
}

pub fn add_noise(img: &RgbImage, kind: RgbKind, level: SeverityLevel, key: RngKey) -> Result<RgbImage> {
    check_group(kind, RgbCategory::Noise)?;
    apply_rgb_level(img, kind, level, key)
}

pub fn apply_blur(img: &RgbImage, kind: RgbKind, level: SeverityLevel, key: RngKey) -> Result<RgbImage> {
    check_group(kind, RgbCategory::Blur)?;
    apply_rgb_level(img, kind, level, key)
}

pub fn apply_environment(img: &RgbImage, kind: RgbKind, level: SeverityLevel, key: RngKey) -> Result<RgbImage> {
    check_group(kind, RgbCategory::Environment)?;
    apply_rgb_level(img, kind, level, key)
}

pub fn apply_postprocess(img: &RgbImage, kind: RgbKind, level: SeverityLevel) -> Result<RgbImage> {
    check_group(kind, RgbCategory::PostProcess)?;
    // post-processing kinds are deterministic; the key is never read
    apply_rgb_level(img, kind, level, RngKey::new(0, ""))
}

/// Applies an RGB perturbation spec to one frame. `key` must carry the frame
/// index and the stage's op id; dynamic specs jitter their level per frame.
pub fn apply_rgb(img: &RgbImage, spec: &PerturbationSpec, key: RngKey) -> Result<RgbImage> {
    let (kind, level) = match (spec.kind(), spec.level()) {
        (PerturbationKind::Rgb(kind), Some(level)) => (kind, level),
        (other, _) => {
            return Err(Error::Parameter(format!(
                "{other:?} is not an RGB imaging perturbation"
            )))
        }
    };
    let level = effective_level(level, spec.mode(), key);
    apply_rgb_level(img, kind, level, key)
}

pub fn apply_rgb_level(img: &RgbImage, kind: RgbKind, level: SeverityLevel, key: RngKey) -> Result<RgbImage> {
    apply_rgb_params(img, &severity_params(ImagingKind::Rgb(kind), level), key)
}

/// Applies explicit parameters, bypassing the severity tables.
pub fn apply_rgb_params(img: &RgbImage, params: &Params, key: RngKey) -> Result<RgbImage> {
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::Parameter("empty image".into()));
    }
    let mut rng = derive_rng(key);
    let mut work = img.to_working();
    let out = match *params {
        Params::GaussianNoise { scale } => {
            noise::gaussian(&mut work, scale, &mut rng);
            work
        }
        Params::ShotNoise { photons } => {
            noise::shot(&mut work, photons, &mut rng);
            work
        }
        Params::ImpulseNoise { amount } => {
            noise::impulse(&mut work, amount, &mut rng);
            work
        }
        Params::SpeckleNoise { scale } => {
            noise::speckle(&mut work, scale, &mut rng);
            work
        }
        Params::GaussianBlur { sigma } => blur::gaussian(&work, sigma)?,
        Params::DefocusBlur { radius, alias_sigma } => blur::defocus(&work, radius, alias_sigma)?,
        Params::MotionBlur { radius, sigma } => blur::motion(&work, radius, sigma, &mut rng)?,
        Params::GlassBlur {
            sigma,
            max_delta,
            iterations,
        } => blur::glass(&work, sigma, max_delta, iterations, &mut rng)?,
        Params::Snow(ref p) => environment::snow(&work, p, &mut rng),
        Params::Frost { intensity, texture } => environment::frost(&work, intensity, texture, &mut rng),
        Params::Fog {
            thickness,
            smoothness,
        } => environment::fog(&work, thickness, smoothness, &mut rng),
        Params::Spatter(ref p) => environment::spatter(&work, p, &mut rng),
        Params::Brightness { offset } => {
            postprocess::brightness(&mut work, offset);
            work
        }
        Params::Contrast { factor } => {
            postprocess::contrast(&mut work, factor);
            work
        }
        Params::Jpeg { quality } => return postprocess::jpeg(img, quality),
        Params::Pixelate { factor } => {
            postprocess::pixelate(&mut work, factor);
            work
        }
        ref other => {
            return Err(Error::Parameter(format!(
                "{other:?} is not an RGB perturbation"
            )))
        }
    };
    Ok(out.quantize())
}
