//! Per-replicate random streams.
//!
//! Replicate `index` under master seed `seed` reads ChaCha8 stream number
//! `index` keyed by `seed`. Streams are independent of one another and of
//! the order in which replicates execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn replicate_stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| replicate_stream(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(
            replicate_stream(7, 3).next_u64(),
            replicate_stream(7, 4).next_u64()
        );
        assert_ne!(
            replicate_stream(7, 3).next_u64(),
            replicate_stream(8, 3).next_u64()
        );
    }
}
