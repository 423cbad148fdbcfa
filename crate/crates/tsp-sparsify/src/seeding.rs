//! Seeded, portable random sampling.
//!
//! All randomness in the crate flows through [`Prng`], a ChaCha8 stream
//! cipher keyed by a 64-bit seed. The value derivations below (unit floats,
//! bounded integers, normals, shuffles) are implemented here on top of the
//! raw 64-bit output so instances reproduce bit-for-bit on any platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 step, used to derive disjoint sub-seeds from a base seed.
///
/// Distinct inputs map to distinct outputs (it is a bijection on u64), so
/// seed namespaces built by mixing a tag never collide for different tags.
pub fn mix(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-seed for a named purpose from a base seed.
pub fn derive(base: u64, tag: u64) -> u64 {
    mix(base ^ mix(tag))
}

/// ChaCha8-backed generator with the crate's documented value derivations.
pub struct Prng {
    inner: ChaCha8Rng,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1): the top 53 bits of one u64 scaled by 2^-53.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }

    /// Uniform in 0..n via rejection of the biased tail.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return (v % n) as usize;
            }
        }
    }

    /// Standard normal via the Box-Muller transform (uses two uniforms,
    /// returns one value; the paired value is discarded for simplicity).
    pub fn normal(&mut self) -> f64 {
        let u1 = loop {
            let u = self.unit_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.unit_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}
