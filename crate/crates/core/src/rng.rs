//! Keyed, counter-based random streams.
//!
//! Every stochastic draw in the toolkit comes from a stream addressed by
//! `(seed, sequence, frame, op)`. The key is packed into a ChaCha8 seed, so a
//! stream depends only on its key and never on which thread or in which order
//! frames are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type KeyedRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngKey {
    pub seed: u64,
    pub sequence: u64,
    pub frame: u64,
    pub op: u64,
}

impl RngKey {
    pub fn new(seed: u64, sequence_id: &str) -> Self {
        Self {
            seed,
            sequence: stable_hash(sequence_id.as_bytes()),
            frame: 0,
            op: 0,
        }
    }

    pub fn with_frame(self, frame: u64) -> Self {
        Self { frame, ..self }
    }

    pub fn with_op(self, op: u64) -> Self {
        Self { op, ..self }
    }

    /// Derives a child key for a secondary purpose of the same operation
    /// (e.g. the severity jitter of a dynamic perturbation).
    pub fn sub(self, tag: u64) -> Self {
        Self {
            op: splitmix64(self.op ^ splitmix64(tag.wrapping_add(0x5eed))),
            ..self
        }
    }
}

pub fn derive_rng(key: RngKey) -> KeyedRng {
    let mut seed = [0u8; 32];
    for (chunk, word) in seed
        .chunks_exact_mut(8)
        .zip([key.seed, key.sequence, key.frame, key.op])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Operation identifier for the `occurrence`-th stage named `name`.
///
/// Identifiers depend on the stage itself, not its position in a pipeline, so
/// removing one stage leaves the streams of all others untouched.
pub fn op_id(name: &str, occurrence: u32) -> u64 {
    splitmix64(stable_hash(name.as_bytes()) ^ (occurrence as u64).rotate_left(32))
}

/// 64-bit FNV-1a.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
