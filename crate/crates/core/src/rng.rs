//! Seeded, platform-independent random streams.
//!
//! Every stream is a ChaCha20 generator keyed by `seed_from_u64(seed)` with
//! its stream counter set to a purpose-specific substream id. Identical
//! `(seed, substream)` pairs give identical draws on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Substream consumed by random coupling networks.
pub const NETWORK_SUBSTREAM: u64 = 1;

/// Phases of realization `r` come from substream `PHASE_SUBSTREAM_BASE + r`.
pub const PHASE_SUBSTREAM_BASE: u64 = 1 << 32;

/// A `(seed, substream)` address of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    pub seed: u64,
    pub substream: u64,
}

impl SeedStream {
    pub fn new(seed: u64, substream: u64) -> Self {
        SeedStream { seed, substream }
    }

    /// Phase stream of realization `index` under `master_seed`.
    pub fn phases(master_seed: u64, index: u64) -> Self {
        SeedStream::new(master_seed, PHASE_SUBSTREAM_BASE + index)
    }

    pub fn network(seed: u64) -> Self {
        SeedStream::new(seed, NETWORK_SUBSTREAM)
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.substream);
        rng
    }

    pub fn record(&self, count: u64) -> DrawRecord {
        DrawRecord {
            seed: self.seed,
            substream: self.substream,
            count,
        }
    }
}

/// How many values were drawn from which stream. Replaying the stream for
/// `count` draws regenerates the same values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DrawRecord {
    pub seed: u64,
    pub substream: u64,
    pub count: u64,
}

impl DrawRecord {
    pub fn stream(&self) -> SeedStream {
        SeedStream::new(self.seed, self.substream)
    }
}

/// Record of the phases drawn for one initial state.
pub type PhaseRecord = DrawRecord;
