//! Counter-based seeding so every trial, trace and noise source gets its own
//! reproducible stream regardless of execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent noise sources inside a single trial. Keeping them on separate
/// streams lets paired runs hold one source fixed while varying a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    TrialConfig = 1,
    Los = 2,
    Indoor = 3,
    Building = 4,
    ShadowFading = 5,
    EntryLoss = 6,
    BaseTraces = 7,
    TargetStats = 8,
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and an index.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent) ^ index.wrapping_mul(0xD134_2543_DE82_EF95))
}

/// A ChaCha generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// A ChaCha generator for `(seed, stream, index)`, e.g. one trace of many.
pub fn indexed_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    stream_rng(derive_seed(seed, index), stream)
}
