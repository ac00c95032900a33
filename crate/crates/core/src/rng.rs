//! Seeded, derivable random-number streams.
//!
//! Every stochastic operation in the crate takes an explicit seed or an
//! [`RngStream`]. Streams are derived from a root seed plus an integer path
//! (for example `(iteration, component, shift_sign)`), so parallel and serial
//! evaluation orders produce identical numbers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64; used only to expand seed paths into ChaCha key material.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic counter-based RNG stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self { state: mix(seed) }
    }

    /// Derive a child stream from an integer path. Children with different
    /// paths are statistically independent; the parent is left untouched.
    pub fn derive(&self, path: &[u64]) -> Self {
        let mut state = self.state;
        for &p in path {
            state = mix(state ^ mix(p.wrapping_add(0xa076_1d64_78bd_642f)));
        }
        Self { state }
    }

    /// Collapse the stream into a single seed value (for APIs that take `u64`).
    pub fn seed_value(&self) -> u64 {
        self.state
    }

    /// Materialize the stream as a concrete RNG.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut s = self.state;
        for chunk in key.chunks_mut(8) {
            s = mix(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}
