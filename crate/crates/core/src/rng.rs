//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, index)`, so pixels,
//! frames and objects can be generated in any order (or in parallel) and still
//! produce identical values. The mixer is the SplitMix64 finalizer:
//!
//! ```text
//! z = x + 0x9E3779B97F4A7C15
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//!
//! `draw(seed, stream, index) = mix(mix(seed ^ mix(stream)) ^ index)`, and a
//! 64-bit draw becomes a uniform in `[0, 1)` through its top 53 bits. All
//! multiplications wrap.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 output function applied to `x`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
    z ^ (z >> 31)
}

/// Top 53 bits of `bits` as a uniform in `[0, 1)`.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A keyed stream of counter-indexed draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        CounterRng {
            key: splitmix64(seed ^ splitmix64(stream)),
        }
    }

    /// Derives an independent sub-stream, e.g. one per frame or per object.
    pub fn substream(&self, stream: u64) -> Self {
        CounterRng {
            key: splitmix64(self.key ^ splitmix64(stream)),
        }
    }

    #[inline]
    pub fn u64_at(&self, index: u64) -> u64 {
        splitmix64(self.key ^ index)
    }

    #[inline]
    pub fn uniform_at(&self, index: u64) -> f64 {
        unit_f64(self.u64_at(index))
    }

    /// Standard normal via Box–Muller on draws `2i` and `2i + 1`.
    #[inline]
    pub fn normal_at(&self, index: u64) -> f64 {
        let u1 = 1.0 - self.uniform_at(2 * index); // (0, 1]
        let u2 = self.uniform_at(2 * index + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Sequential view over a [`CounterRng`] for code that just needs "the next"
/// value.
#[derive(Debug, Clone)]
pub struct Sequence {
    rng: CounterRng,
    next: u64,
}

impl Sequence {
    pub fn new(rng: CounterRng) -> Self {
        Sequence { rng, next: 0 }
    }

    pub fn uniform(&mut self) -> f64 {
        let v = self.rng.uniform_at(self.next);
        self.next += 1;
        v
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }
}
