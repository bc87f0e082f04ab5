//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 stream keyed by the
//! run seed and a purpose-specific stream id. ChaCha is counter based, so a
//! stream's output depends only on `(seed, stream)` and never on how work
//! was scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

pub const BATCH_INDEX: u64 = 1;
pub const ACCEPTANCE: u64 = 2;
pub const ANNEALING: u64 = 3;
pub const ORACLE_SAMPLING: u64 = 4;
pub const CIRCUIT_GENERATION: u64 = 5;
pub const FIXED_BITS: u64 = 6;
pub const SYNTHETIC: u64 = 7;

pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
