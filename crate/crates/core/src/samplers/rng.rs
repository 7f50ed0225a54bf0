use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A `(seed, stream_id)` pair naming one independent ChaCha8 keystream.
///
/// The seed fixes the key and the stream id selects the nonce, so streams
/// sharing a seed never overlap and can be consumed on any thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Deterministic child stream; children of distinct `(stream_id, index)`
    /// pairs are distinct with overwhelming probability.
    pub fn child(&self, index: u64) -> Self {
        Self { seed: self.seed, stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x5851_F42D))) }
    }

    /// Stream for replication `rep` of grid point `grid`.
    pub fn for_cell(seed: u64, grid: u64, rep: u64) -> Self {
        Self::new(seed, (grid << 32) | (rep & 0xFFFF_FFFF))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
