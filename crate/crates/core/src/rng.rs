//! Replication-local random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type ReplicationRng = ChaCha20Rng;

/// Stream `replication` of the generator seeded by `master_seed`.
pub fn replication_rng(master_seed: u64, replication: u64) -> ReplicationRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}
