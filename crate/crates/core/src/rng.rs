//! Counter-based pseudorandom function.
//!
//! Every variate is a pure function of a key and a counter, so variables can
//! be derived lazily, in any order, and from any thread without shared state.
//! Replica and sweep-cell seeds are derived from a master seed through tagged
//! streams; the resulting outputs are reproducible bit for bit regardless of
//! how work is scheduled.

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. Bijective on u64, good avalanche.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Purpose tags for derived streams. Distinct tags give independent streams
/// from the same key.
pub mod tags {
    pub const UNIFORM: u64 = 1;
    pub const COMPASS: u64 = 2;
    pub const REPLICA: u64 = 3;
    pub const CELL: u64 = 4;
    pub const EVAL: u64 = 5;
    pub const FREE: u64 = 6;
}

/// Keyed counter-based generator.
#[derive(Clone, Copy, Debug)]
pub struct Prf {
    key: u64,
}

impl Prf {
    pub fn new(seed: u64) -> Self {
        Prf {
            key: mix64(seed ^ GAMMA),
        }
    }

    /// Derive an independent stream for a purpose tag.
    pub fn stream(&self, tag: u64) -> Prf {
        Prf {
            key: mix64(self.key ^ tag.wrapping_mul(GAMMA)),
        }
    }

    /// The i-th word of this stream.
    #[inline]
    pub fn value(&self, i: u64) -> u64 {
        mix64(self.key.wrapping_add(i.wrapping_mul(GAMMA)))
    }

    /// Word indexed by a pair of counters.
    #[inline]
    pub fn value2(&self, a: u64, b: u64) -> u64 {
        mix64(mix64(self.key ^ a.wrapping_mul(GAMMA)).wrapping_add(b.wrapping_mul(GAMMA)))
    }

    /// Uniform in [0, 1), 53 significant bits.
    #[inline]
    pub fn unit_f64(&self, i: u64) -> f64 {
        (self.value(i) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..bound (bound <= 255). Fixed-point multiply, no loop.
    #[inline]
    pub fn below(&self, i: u64, bound: u8) -> u8 {
        (((self.value(i) as u128) * bound as u128) >> 64) as u8
    }

    /// Uniform in [0, 1) indexed by a pair of counters.
    #[inline]
    pub fn unit2(&self, a: u64, b: u64) -> f64 {
        (self.value2(a, b) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..bound indexed by a pair of counters.
    #[inline]
    pub fn below2(&self, a: u64, b: u64, bound: u8) -> u8 {
        (((self.value2(a, b) as u128) * bound as u128) >> 64) as u8
    }
}
