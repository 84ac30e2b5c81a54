//! Sources of uniform random numbers for the flash process.
//!
//! A seeded source never runs dry. A [`BitString`] source turns pre-given
//! random bits into uniforms, 32 bits per draw, and fails with the name of the
//! draw that found the string exhausted.

use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::ModelError;
use crate::quantum::Side;

/// Bits consumed by one continuous draw.
pub const BITS_PER_DRAW: usize = 32;

/// What a uniform variate is used for. Carried by starvation errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Draw {
    FlashCount(Side),
    FlashTime(Side, usize),
    FlashPosition(Side, usize),
    HiddenAngle,
    StrategySelector,
    Channel(Side, usize),
}

impl fmt::Display for Draw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Draw::FlashCount(s) => write!(f, "flash count in region {s}"),
            Draw::FlashTime(s, i) => write!(f, "time of flash {i} in region {s}"),
            Draw::FlashPosition(s, i) => write!(f, "position of flash {i} in region {s}"),
            Draw::HiddenAngle => f.write_str("hidden angle"),
            Draw::StrategySelector => f.write_str("strategy selector"),
            Draw::Channel(s, i) => write!(f, "channel of flash {i} in region {s}"),
        }
    }
}

pub trait Uniforms {
    /// A variate in `[0, 1)`.
    fn uniform(&mut self, draw: Draw) -> Result<f64, ModelError>;
}

/// ChaCha8 stream keyed by a per-run seed.
pub struct SeededUniforms {
    rng: ChaCha8Rng,
}

impl SeededUniforms {
    pub fn new(seed: u64) -> Self {
        SeededUniforms {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Uniforms for SeededUniforms {
    fn uniform(&mut self, _draw: Draw) -> Result<f64, ModelError> {
        Ok((self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
    }
}

/// A finite string of random bits `X₁, X₂, …`, stored in 32-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u32>,
}

impl BitString {
    pub fn from_words(words: Vec<u32>) -> Self {
        BitString { words }
    }

    /// Uniformly random string of `n_bits` bits (rounded up to whole words).
    pub fn random(n_bits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_words = n_bits.div_ceil(BITS_PER_DRAW);
        BitString {
            words: (0..n_words).map(|_| rng.next_u32()).collect(),
        }
    }

    pub fn len_bits(&self) -> usize {
        self.words.len() * BITS_PER_DRAW
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn bit(&self, i: usize) -> Option<bool> {
        let w = self.words.get(i / BITS_PER_DRAW)?;
        Some((w >> (31 - i % BITS_PER_DRAW)) & 1 == 1)
    }

    pub(crate) fn reader(&self) -> BitUniforms<'_> {
        BitUniforms {
            words: &self.words,
            pos: 0,
        }
    }
}

impl fmt::LowerHex for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.words {
            write!(f, "{w:08x}")?;
        }
        Ok(())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for BitString {
    /// As a hex string, eight digits per word.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&format_args!("{self:x}"))
    }
}

/// Inverse-CDF consumer of a [`BitString`]: word `w` maps to `(w + ½) / 2³²`.
pub struct BitUniforms<'a> {
    words: &'a [u32],
    pos: usize,
}

impl BitUniforms<'_> {
    pub fn consumed_bits(&self) -> usize {
        self.pos * BITS_PER_DRAW
    }
}

impl Uniforms for BitUniforms<'_> {
    fn uniform(&mut self, draw: Draw) -> Result<f64, ModelError> {
        let w = *self
            .words
            .get(self.pos)
            .ok_or(ModelError::BitsExhausted { draw })?;
        self.pos += 1;
        Ok((f64::from(w) + 0.5) * (1.0 / 4_294_967_296.0))
    }
}

/// Poisson(`mean`) variate by sequential inversion of the CDF at `u`.
pub fn poisson_inverse(mean: f64, u: f64) -> u32 {
    let mut k = 0u32;
    let mut p = libm::exp(-mean);
    let mut cdf = p;
    while u > cdf && k < 100_000 {
        k += 1;
        p *= mean / f64::from(k);
        cdf += p;
        if p == 0.0 && cdf < u {
            // underflowed tail; u is numerically unreachable
            break;
        }
    }
    k
}

/// Smallest `k` with `P(N <= k) >= 1 - tail` for `N ~ Poisson(mean)`.
pub fn poisson_quantile(mean: f64, tail: f64) -> u32 {
    poisson_inverse(mean, 1.0 - tail)
}
