//! Seeded stream derivation for reproducible trials.
//!
//! Every trial draws from ChaCha streams derived from one master seed.
//! Stream ids are allocated as `trial * STREAMS_PER_TRIAL + channel`, where
//! channel 0 carries the disturbance sequence (shared by the algorithm run and
//! every benchmark rollout of that trial) and channels 1.. carry per-algorithm
//! arm-sampling randomness. Replaying any single trial in isolation therefore
//! reproduces its rows exactly.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of stream ids reserved per trial.
pub const STREAMS_PER_TRIAL: u64 = 16;

/// Channel 0: disturbances (common random numbers across algorithms).
pub const CHANNEL_NOISE: u64 = 0;

/// Channels 1..: algorithm-internal randomness, one per compared algorithm.
pub const CHANNEL_ARMS: u64 = 1;

pub fn stream_rng(master_seed: u64, trial: u64, channel: u64) -> ChaCha8Rng {
    debug_assert!(channel < STREAMS_PER_TRIAL);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial * STREAMS_PER_TRIAL + channel);
    rng
}

pub fn noise_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    stream_rng(master_seed, trial, CHANNEL_NOISE)
}

pub fn arm_rng(master_seed: u64, trial: u64, algorithm_index: u64) -> ChaCha8Rng {
    stream_rng(master_seed, trial, CHANNEL_ARMS + algorithm_index)
}

/// FNV-1a over the little-endian bytes of a float sequence. Used to assert
/// that paired comparisons consumed byte-identical disturbances.
pub fn checksum(values: &[f64]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_le_bytes() {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}
