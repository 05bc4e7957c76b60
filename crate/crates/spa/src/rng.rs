//! Counter-based keyed randomness for the generator.
//!
//! Every draw is a pure function of `(seed, stream, a, b)`. The coin for the
//! candidate link `(t, u)` therefore never depends on iteration order or on
//! which engine produced the candidate, which is what makes the naive and
//! grid engines bit-identical and testable against each other.

/// Independent stream labels, folded into the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Vertex coordinates; keyed by (birth index, axis).
    Position = 1,
    /// Link coins; keyed by (source birth index, target birth index).
    Link = 2,
}

/// splitmix64 finalizer: full avalanche on 64 bits.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy)]
pub struct KeyedRng {
    seed: u64,
}

impl KeyedRng {
    pub fn new(seed: u64) -> Self {
        KeyedRng { seed }
    }

    #[inline]
    fn raw(&self, stream: Stream, a: u64, b: u64) -> u64 {
        let mut h = self.seed ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        h = mix(h);
        h = mix(h ^ a);
        mix(h ^ b)
    }

    /// Uniform draw in `[0, 1)` keyed by `(stream, a, b)`.
    #[inline]
    pub fn unit(&self, stream: Stream, a: u64, b: u64) -> f64 {
        // top 53 bits scaled into [0,1)
        (self.raw(stream, a, b) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
