//! Seed derivation.
//!
//! Every random draw in a run comes from a ChaCha8 generator keyed by the
//! run seed. Independent components read from separate ChaCha streams of
//! the same key, so switching one component off (for example suppressing
//! environment noise) never shifts the draws seen by another:
//!
//! | stream | consumer                                  |
//! |--------|-------------------------------------------|
//! | 1      | agent action selection                    |
//! | 2      | environment noise                         |
//! | 3      | bandit policy coin flips / exploration    |
//!
//! Forecaster initialisation seeds are not streams but are hashed from
//! `(run seed, arm, pull index)` with SplitMix64 so each fresh network is
//! reproducible in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bandit::ArmId;

pub type RunRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Agent = 1,
    EnvNoise = 2,
    Policy = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn forecaster_seed(run_seed: u64, arm: ArmId, pull_index: u32) -> u64 {
    let h = splitmix64(run_seed ^ 0xF0CA_57E5);
    let h = splitmix64(h ^ arm.index() as u64);
    splitmix64(h ^ u64::from(pull_index))
}
