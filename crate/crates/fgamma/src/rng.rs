//! Reproducible random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// A `(seed, stream)` pair. Equal pairs give equal sequences no matter how
/// work is scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }

    /// Independent stream for the `k`-th component of this task.
    pub fn child(&self, k: u64) -> RngStream {
        RngStream { seed: self.seed, stream: self.stream.wrapping_mul(1 << 16).wrapping_add(k + 1) }
    }
}
