use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_rng, RngKey};
use crate::severity::{DepthKind, ImagingKind, RgbKind, SeverityLevel};
use crate::types::Mode;

/// Sub-stream tag for the per-frame severity jitter of dynamic perturbations.
const LEVEL_JITTER_TAG: u64 = 0x1e7e1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationKind {
    Rgb(RgbKind),
    Depth(DepthKind),
    MotionDeviation,
    Desync,
}

impl PerturbationKind {
    /// All 22 perturbation kinds: 16 RGB, 4 depth, motion deviation, desync.
    pub fn all() -> Vec<PerturbationKind> {
        RgbKind::ALL
            .into_iter()
            .map(PerturbationKind::Rgb)
            .chain(DepthKind::ALL.into_iter().map(PerturbationKind::Depth))
            .chain([PerturbationKind::MotionDeviation, PerturbationKind::Desync])
            .collect()
    }

    pub fn imaging(self) -> Option<ImagingKind> {
        match self {
            PerturbationKind::Rgb(k) => Some(ImagingKind::Rgb(k)),
            PerturbationKind::Depth(k) => Some(ImagingKind::Depth(k)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Severity {
    Level(SeverityLevel),
    Deviation {
        rotation_std_deg: f64,
        translation_std_m: f64,
    },
    Interval(u32),
}

/// A single perturbation with its strength and temporal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    kind: PerturbationKind,
    severity: Severity,
    mode: Mode,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, severity: Severity, mode: Mode) -> Result<Self> {
        match (kind, severity) {
            (PerturbationKind::Rgb(_) | PerturbationKind::Depth(_), Severity::Level(_)) => {}
            (
                PerturbationKind::MotionDeviation,
                Severity::Deviation {
                    rotation_std_deg,
                    translation_std_m,
                },
            ) => {
                if !(rotation_std_deg >= 0.0 && rotation_std_deg.is_finite())
                    || !(translation_std_m >= 0.0 && translation_std_m.is_finite())
                {
                    return Err(Error::Parameter(format!(
                        "deviation stds must be finite and >= 0 (got {rotation_std_deg} deg, {translation_std_m} m)"
                    )));
                }
            }
            (PerturbationKind::Desync, Severity::Interval(_)) => {}
            (kind, severity) => {
                return Err(Error::Config(format!(
                    "severity {severity:?} does not apply to {kind:?}"
                )))
            }
        }
        Ok(Self {
            kind,
            severity,
            mode,
        })
    }

    pub fn rgb(kind: RgbKind, level: SeverityLevel, mode: Mode) -> Self {
        Self {
            kind: PerturbationKind::Rgb(kind),
            severity: Severity::Level(level),
            mode,
        }
    }

    pub fn depth(kind: DepthKind, level: SeverityLevel, mode: Mode) -> Self {
        Self {
            kind: PerturbationKind::Depth(kind),
            severity: Severity::Level(level),
            mode,
        }
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    pub fn severity(&self) -> Severity {
        self.severity
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn level(&self) -> Option<SeverityLevel> {
        match self.severity {
            Severity::Level(l) => Some(l),
            _ => None,
        }
    }
}

/// Severity in effect for one frame.
///
/// Static specs keep their level. Dynamic specs draw a uniform offset from
/// {-1, 0, +1} per frame, clamped to 1..=5.
pub fn effective_level(level: SeverityLevel, mode: Mode, frame_key: RngKey) -> SeverityLevel {
    match mode {
        Mode::Static => level,
        Mode::Dynamic => {
            let mut rng = derive_rng(frame_key.sub(LEVEL_JITTER_TAG));
            level.offset_clamped(rng.random_range(-1i8..=1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_two_kinds() {
        assert_eq!(PerturbationKind::all().len(), 22);
    }

    #[test]
    fn construction_validates_parameters() {
        let dev = |r, t| Severity::Deviation {
            rotation_std_deg: r,
            translation_std_m: t,
        };
        assert!(PerturbationSpec::new(PerturbationKind::MotionDeviation, dev(1.0, 0.0), Mode::Static).is_ok());
        assert!(PerturbationSpec::new(PerturbationKind::MotionDeviation, dev(-1.0, 0.0), Mode::Static).is_err());
        assert!(PerturbationSpec::new(PerturbationKind::Desync, Severity::Interval(5), Mode::Dynamic).is_ok());
        assert!(PerturbationSpec::new(
            PerturbationKind::Rgb(RgbKind::Fog),
            Severity::Interval(5),
            Mode::Static
        )
        .is_err());
    }

    #[test]
    fn dynamic_level_one_hits_one_and_two_only() {
        let key = RngKey::new(3, "dyn");
        let mut seen = [0usize; 6];
        for f in 0..10_000 {
            let l = effective_level(SeverityLevel::MIN, Mode::Dynamic, key.with_frame(f));
            seen[l.get() as usize] += 1;
        }
        assert_eq!(seen[3] + seen[4] + seen[5], 0);
        assert!(seen[1] > 0 && seen[2] > 0);
        // P(level 1) = 2/3 under the clamped uniform rule.
        let p1 = seen[1] as f64 / 10_000.0;
        assert!((p1 - 2.0 / 3.0).abs() < 0.02, "{p1}");
    }

    #[test]
    fn static_level_is_constant() {
        let key = RngKey::new(3, "dyn");
        let l3 = SeverityLevel::new(3).unwrap();
        assert!((0..100).all(|f| effective_level(l3, Mode::Static, key.with_frame(f)) == l3));
    }
}
