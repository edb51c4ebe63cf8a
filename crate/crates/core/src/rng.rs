//! Seeded random streams with hierarchical substreams.
//!
//! The generator is SplitMix64. A substream for a key path `[k0, k1, ...]`
//! under `seed` starts from the state
//!
//! ```text
//! s = mix64(seed)
//! for k in path: s = mix64(s ^ mix64(k + GAMMA))
//! ```
//!
//! with `GAMMA = 0x9E3779B97F4A7C15` and `mix64` the SplitMix64 output
//! finalizer, all arithmetic wrapping modulo 2^64. Each draw adds `GAMMA` to
//! the state and returns `mix64(state)`. Uniform floats take the top 53 bits:
//! `(x >> 11) * 2^-53`.
//!
//! Every stream is fully determined by `(seed, path)`, so data generated per
//! image or per annotator does not depend on generation order or threading.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// A stream starting at the raw state `state`.
    pub fn from_state(state: u64) -> Self {
        SplitMix64 { state }
    }

    /// The substream of `seed` addressed by `path`.
    pub fn substream(seed: u64, path: &[u64]) -> Self {
        let mut state = mix64(seed);
        for &key in path {
            state = mix64(state ^ mix64(key.wrapping_add(GAMMA)));
        }
        SplitMix64 { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)` via the high word of a 64x64 product.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// True with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
