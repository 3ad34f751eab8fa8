//! Seed discipline.
//!
//! A master seed is mixed with a trial index to give each trial its own seed.
//! Within a trial, every purpose (initialization, fitness noise, selection,
//! crossover, mutation) draws from its own ChaCha8 stream keyed by the trial
//! seed, so changing how often one component consumes randomness never
//! perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`: `mix64(master + index)`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Noise = 2,
    Selection = 3,
    Crossover = 4,
    Mutation = 5,
    Instance = 6,
}

pub fn stream(seed: u64, purpose: Purpose) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// The per-purpose generators owned by one run.
#[derive(Clone, Debug)]
pub struct RunStreams {
    pub init: Rng,
    pub noise: Rng,
    pub selection: Rng,
    pub crossover: Rng,
    pub mutation: Rng,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        RunStreams {
            init: stream(seed, Purpose::Init),
            noise: stream(seed, Purpose::Noise),
            selection: stream(seed, Purpose::Selection),
            crossover: stream(seed, Purpose::Crossover),
            mutation: stream(seed, Purpose::Mutation),
        }
    }
}
