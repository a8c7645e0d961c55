//! Independent random streams per node and round.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream for `(seed, node, round)`. The three values are packed into the
/// ChaCha key, so streams never overlap and no state is shared between nodes.
pub fn node_rng(seed: u64, node: u64, round: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&node.to_le_bytes());
    key[16..24].copy_from_slice(&round.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
