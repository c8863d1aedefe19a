//! Deterministic random primitives with a pinned, documented derivation
//! so generated data is reproducible from the seed alone.
//!
//! Streams: `sub_seed = splitmix64(master_seed XOR stream_tag)`, fed to
//! a ChaCha12 generator keyed through the standard SplitMix64 expansion
//! (`SeedableRng::seed_from_u64`). Trial `t` uses `stream_tag = t`; the
//! dictionary stream uses the reserved tag [`DICTIONARY_STREAM`].
//!
//! Derived values, in terms of the raw `next_u64` output:
//! - uniform in [0,1): `(next_u64 >> 11) * 2^-53`
//! - standard normal: Box-Muller, `sqrt(-2 ln(1-u1)) * cos(2 pi u2)`
//!   with `u1`, `u2` two consecutive uniforms (the sine companion is
//!   discarded)
//! - bounded integer in [0,n): modulo with rejection of the biased
//!   upper range
//! - distinct k-subset of [0,n): partial Fisher-Yates over 0..n taking
//!   the first k entries, returned sorted

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Stream tag reserved for dictionary generation (trials use their index).
pub const DICTIONARY_STREAM: u64 = 0xD1C7_0000_0000_0000;

/// SplitMix64 finalizer.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha12Rng,
}

impl Stream {
    pub fn new(master_seed: u64, stream_tag: u64) -> Self {
        Stream {
            rng: ChaCha12Rng::seed_from_u64(splitmix64(master_seed ^ stream_tag)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller (cosine branch).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, n), unbiased.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < limit {
                return v % n;
            }
        }
    }

    /// `k` distinct values from [0, n), sorted ascending.
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.uniform_below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}
