//! Reproducible random streams.
//!
//! Every trajectory owns two ChaCha8 streams keyed by the root seed:
//! stream `2 * id` feeds measurement outcomes and stream `2 * id + 1` feeds
//! input-state preparation. Outcome sampling consumes exactly one `u64` per
//! column, so the outcome of column `k` is always word pair `k` of the
//! outcome stream no matter how the input was prepared. Adding trajectories
//! never reshuffles earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Outcome stream for trajectory `id`.
pub fn outcome_stream(seed: u64, id: u64) -> StreamRng {
    stream(seed, id.wrapping_mul(2))
}

/// Input-preparation stream for trajectory `id`.
pub fn input_stream(seed: u64, id: u64) -> StreamRng {
    stream(seed, id.wrapping_mul(2).wrapping_add(1))
}

/// Outcome stream positioned at the start of column `column`.
pub fn outcome_stream_at(seed: u64, id: u64, column: u64) -> StreamRng {
    let mut rng = outcome_stream(seed, id);
    // One u64 per column is two 32-bit words.
    rng.set_word_pos(u128::from(column) * 2);
    rng
}
