//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 keyed by the run seed. Each generation
//! gets one independent ChaCha stream per operator class, with stream number
//! `generation * 8 + class`. A stream therefore depends only on the run seed,
//! the generation, and the operator class, never on how many values earlier
//! stages consumed or on worker scheduling. Resuming at a generation boundary
//! only needs the seed and the generation index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::genome::Identifier;

pub type StreamRng = ChaCha8Rng;

/// Operator classes, each with its own stream per generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum OperatorClass {
    Initialization = 0,
    ParentSelection = 1,
    Crossover = 2,
    Mutation = 3,
    EnvironmentalSelection = 4,
}

const CLASSES_PER_GENERATION: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        SeedStreams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, generation: u64, class: OperatorClass) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(generation * CLASSES_PER_GENERATION + class as u64);
        rng
    }

    /// Training seed for an evaluation job. Depends on the run seed and the
    /// genome identifier only, so the same architecture always trains with
    /// the same seed regardless of when it is dispatched.
    pub fn job_seed(&self, id: &Identifier) -> u64 {
        splitmix64(self.seed ^ id.prefix_u64())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
