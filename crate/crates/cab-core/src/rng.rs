//! Deterministic random source.
//!
//! All randomness in the crate flows through [`CabRng`], a ChaCha8 stream
//! cipher keyed from a 64-bit seed. The Gaussian transform is the polar
//! Box-Muller method and is fixed: the same seed always reproduces the same
//! draw sequence within this crate. Distinct logical streams (bouquet,
//! support pattern, trial, ...) derive their own seeds with [`sub_seed`], a
//! SplitMix64-based mixer, so that adding draws to one stream never perturbs
//! another.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Domain separation tags for [`sub_seed`].
pub mod domain {
    pub const MEAN: u64 = 1;
    pub const BOUQUET: u64 = 2;
    pub const PATTERN: u64 = 3;
    pub const MAGNITUDE: u64 = 4;
    pub const TRIAL: u64 = 5;
    pub const SYMBOL: u64 = 6;
    pub const XI_SUPPORT: u64 = 7;
}

/// SplitMix64 output function (Steele, Lea & Flood). Bijective on `u64`.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from a base seed and a path of parts.
///
/// `sub_seed(s, &[a, b])` folds each part into the state with SplitMix64;
/// the mapping is fixed and documented so that runs are self-reproducible.
pub fn sub_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &part in parts {
        state = splitmix64(state ^ part.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    state
}

/// Counter-based deterministic generator (ChaCha8) with fixed scalar
/// transforms for uniforms, Gaussians and subset sampling.
pub struct CabRng {
    inner: ChaCha8Rng,
    cached_normal: Option<f64>,
}

impl CabRng {
    /// Keys the ChaCha8 stream by expanding `seed` through SplitMix64.
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        CabRng {
            inner: ChaCha8Rng::from_seed(key),
            cached_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Unbiased uniform integer in `[0, n)` via modulo rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let r = self.next_u64();
            if r < zone {
                return r % n;
            }
        }
    }

    /// Random sign, +1.0 or -1.0 with equal probability.
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Standard normal draw via the polar Box-Muller method.
    ///
    /// Each accepted point of the rejection loop yields two independent
    /// normals; the second is cached. The transform is part of the crate's
    /// reproducibility contract and must not change.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.cached_normal = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// Uniform random size-`k` subset of `{0, .., n-1}`, sorted increasing.
    ///
    /// Floyd's algorithm: k iterations, no O(n) shuffle.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "subset: k={k} > n={n}");
        let mut chosen = std::collections::BTreeSet::new();
        for j in (n - k)..n {
            let t = self.below(j as u64 + 1) as usize;
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        chosen.into_iter().collect()
    }
}
