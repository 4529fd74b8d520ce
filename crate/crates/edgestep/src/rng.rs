//! Deterministic replica seeding.
//!
//! Every source of randomness in the suite is a ChaCha8 stream selected by
//! the pair `(master_seed, stream id)`. ChaCha8 exposes 2^64 independent
//! streams per key, so replicas never overlap and campaign results are
//! bit-identical regardless of worker count or scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream slots reserved per replica. Slot 0 drives the main process
/// (graph or urn), slot 1 seeds bootstrap infections on that replica's
/// graph, slots 2–3 are reserved for future observables.
pub const STREAMS_PER_REPLICA: u64 = 4;

/// RNG driving the main process of a replica.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    stream_rng(master_seed, replica, 0)
}

/// RNG for auxiliary randomness of a replica; `purpose` selects the slot.
pub fn stream_rng(master_seed: u64, replica: u64, purpose: u64) -> ChaCha8Rng {
    assert!(purpose < STREAMS_PER_REPLICA, "reserved stream slots exceeded");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica * STREAMS_PER_REPLICA + purpose);
    rng
}
