//! Deterministic random-number streams.
//!
//! Every dataset is driven by a single master seed. Independent sub-streams
//! are derived from `(master_seed, label)` pairs, one per purpose (OFDM
//! symbols, initial hardware draw, each drifting parameter, receiver noise).
//! Because each consumer owns its stream, the schedule in which consumers run
//! — including the degree of parallelism in a sweep — never changes the draws
//! any of them sees, which is what makes experiment output byte-reproducible.
//!
//! Stream derivation is self-contained (FNV-1a over the label, mixed with the
//! seed through SplitMix64) so it does not depend on hash implementations that
//! may change between toolchain releases.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 64-bit FNV-1a hash of a byte string.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 output function; a strong 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seeded generator for one `(master_seed, label)` sub-stream.
///
/// The same pair always yields the same generator; distinct labels yield
/// statistically independent streams.
pub fn stream(master_seed: u64, label: &str) -> ChaCha8Rng {
    let mut state = splitmix64(master_seed ^ fnv1a64(label.as_bytes()));
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Stable 64-bit content hash, exposed for keying persisted artifacts
/// (e.g. tuned hyperparameters) to the configuration that produced them.
pub fn content_hash(bytes: &[u8]) -> u64 {
    splitmix64(fnv1a64(bytes))
}
