//! Fixtures shared by the criterion benches.

use prequential::random::EventSampler;
use prequential::EventUnion;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic batch of desk-scale random events.
pub fn desk_events(count: usize, seed: u64) -> Vec<EventUnion> {
    let sampler = EventSampler::desk_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampler.event_with_horizon(3, &mut rng)).collect()
}
