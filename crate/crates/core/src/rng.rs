//! Counter-based random streams.
//!
//! A stream is addressed by `(master_seed, stream_index)`. The master seed
//! keys a ChaCha8 generator and the index selects its 64-bit stream
//! identifier, so every (seed, index) pair owns a disjoint keystream and
//! draws do not depend on which worker consumes them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type handed out by [`RandomStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RandomStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

pub fn derive_stream(master_seed: u64, index: u64) -> RandomStream {
    RandomStream { master_seed, stream_index: index }
}

impl RandomStream {
    pub fn new(master_seed: u64) -> Self {
        derive_stream(master_seed, 0)
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut key = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Independent sub-stream keyed by this stream and `index`.
    pub fn child(&self, index: u64) -> RandomStream {
        let mut state = self.master_seed ^ self.stream_index.wrapping_mul(0xD1B5_4A32_D192_ED03);
        let a = splitmix64(&mut state);
        RandomStream { master_seed: a ^ 0x5851_F42D_4C95_7F2D, stream_index: index }
    }

    /// Sub-stream for a labelled cell of an experiment grid.
    pub fn labelled(&self, label: &str) -> RandomStream {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.child(h)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
