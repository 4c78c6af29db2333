//! Keyed, random-access uniform streams.
//!
//! Pair characteristics and link shocks are indexed by node pairs, and the
//! banded and lazy code paths read only a small part of the `n × n` array.
//! Each draw is therefore a pure function of `(key, a, b)`: the output of
//! SplitMix64 at stream position `a·2³² + b + 1`. Dense and lazy consumers
//! read bitwise-identical values, and replications evaluated in any order or
//! on any thread see the same numbers.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit key from a master seed and a tag path.
pub fn derive_key(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(mix64(seed.wrapping_add(GOLDEN)), |acc, &t| {
            mix64(acc ^ mix64(t.wrapping_add(GOLDEN).wrapping_mul(GOLDEN)))
        })
}

/// Stream tags separating the random inputs of one replication.
pub mod tag {
    pub const PAIR: u64 = 1;
    pub const SHOCK: u64 = 2;
    pub const NODE: u64 = 3;
    pub const COVARIATE: u64 = 4;
    pub const NODE_SHOCK: u64 = 5;
    pub const MU_ORACLE: u64 = 6;
    pub const REPLICATION: u64 = 7;
    pub const EVENTS: u64 = 8;
    pub const MOMENTS: u64 = 9;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(seed: u64, tags: &[u64]) -> Self {
        Self {
            key: derive_key(seed, tags),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Sub-stream for one replication.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            key: derive_key(self.key, &[tag]),
        }
    }

    #[inline]
    pub fn bits(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < (1 << 32) && b < (1 << 32));
        let position = (a << 32 | b).wrapping_add(1);
        mix64(self.key.wrapping_add(position.wrapping_mul(GOLDEN)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&self, a: u64, b: u64) -> f64 {
        (self.bits(a, b) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform strictly inside `(0, 1)`.
    #[inline]
    pub fn uniform_open(&self, a: u64, b: u64) -> f64 {
        ((self.bits(a, b) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard logistic draw by inverse CDF.
    #[inline]
    pub fn logistic(&self, a: u64, b: u64) -> f64 {
        let u = self.uniform_open(a, b);
        (u / (1.0 - u)).ln()
    }
}
