//! Seeded random streams.
//!
//! Every parallel unit of work gets its own ChaCha stream derived from the
//! master seed and a stream index, so results do not depend on how work is
//! split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn master(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream `stream` of `seed`.
pub fn derived(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sub-stream for a two-level index such as (schedule entry, trial).
pub fn derived2(seed: u64, outer: u64, inner: u64) -> Rng {
    debug_assert!(inner <= u32::MAX as u64);
    derived(seed, (outer << 32) | (inner & 0xffff_ffff))
}
