//! SplitMix64 sample streams.
//!
//! State update `s += 0x9E3779B97F4A7C15`, output mix
//! `z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9`,
//! `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, `z ^ (z >> 31)`.
//! Uniform doubles take the top 53 bits: `(z >> 11) · 2⁻⁵³`.
//!
//! Because the state advances by a constant, draw `k` of the stream seeded
//! with `seed` is available in O(1) via [`SplitMix64::at`]; parallel workers
//! that start at `at(seed, i · draws_per_sample)` reproduce the serial
//! stream exactly.

pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// The stream positioned after `offset` draws.
    pub fn at(seed: u64, offset: u64) -> Self {
        Self {
            state: seed.wrapping_add(offset.wrapping_mul(GAMMA)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_f64() * n as f64) as usize % n.max(1)
    }
}
