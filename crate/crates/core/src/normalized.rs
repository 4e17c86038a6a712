//! Normalized posits: the `(n - 1)`-bit encoding of those `Posit(n, es)`
//! patterns whose two leading bits coincide, i.e. the values in `[-1, 1)`.
//!
//! Compression drops the redundant leading bit; expansion replicates the
//! stored leading bit back. Exactly half of all `2^n` patterns are in range.

use std::fmt;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::posit::{self, encode_round, PositConfig, PositPattern};

/// An `(n - 1)`-bit normalized pattern. `config` is the original `(n, es)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NormalizedPositPattern {
    config: PositConfig,
    bits: u32,
}

impl NormalizedPositPattern {
    pub fn new(config: PositConfig, bits: u32) -> Result<Self> {
        let width = config.n() - 1;
        if bits >> width != 0 {
            return Err(Error::PatternTooWide {
                bits: bits as u64,
                width,
            });
        }
        Ok(NormalizedPositPattern { config, bits })
    }

    /// Parses an MSB-first string of exactly `n - 1` binary digits.
    pub fn from_bit_str(config: PositConfig, s: &str) -> Result<Self> {
        Self::new(config, posit::parse_bits(s, config.n() - 1)?)
    }

    pub fn config(self) -> PositConfig {
        self.config
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Stored width, `n - 1`.
    pub fn width(self) -> u32 {
        self.config.n() - 1
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    /// The pattern `10…0`, which expands to −1.
    pub fn is_neg_one(self) -> bool {
        self.bits == 1 << (self.width() - 1)
    }

    pub fn value(self) -> DyadicRational {
        posit::decode_value(expand(self)).expect("expanded pattern is never NaR")
    }

    pub fn to_bit_string(self) -> String {
        posit::format_bits(self.bits as u64, self.width())
    }
}

impl fmt::Display for NormalizedPositPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

/// True iff bit `n-1` equals bit `n-2`: values in `[-1, 1)`.
pub fn in_normalized_range(p: PositPattern) -> bool {
    let n = p.config().n();
    p.bit(n - 1) == p.bit(n - 2)
}

pub fn compress(p: PositPattern) -> Result<NormalizedPositPattern> {
    if !in_normalized_range(p) {
        return Err(Error::OutOfNormalizedRange);
    }
    let n = p.config().n();
    Ok(NormalizedPositPattern {
        config: p.config(),
        bits: p.bits() & ((1u32 << (n - 1)) - 1),
    })
}

pub fn expand(np: NormalizedPositPattern) -> PositPattern {
    let w = np.width();
    let lead = (np.bits >> (w - 1)) & 1;
    PositPattern::new(np.config, np.bits | lead << w).expect("fits in n bits")
}

/// Largest in-range positive pattern, `0011…1` (value `1 - ulp`).
pub fn max_normalized(c: PositConfig) -> PositPattern {
    PositPattern::new(c, (1u32 << (c.n() - 2)) - 1).expect("fits")
}

/// Smallest in-range pattern, `1100…0` (value −1).
pub fn neg_one(c: PositConfig) -> PositPattern {
    let n = c.n();
    PositPattern::new(c, 0b11 << (n - 2)).expect("fits")
}

/// Quantizes an arbitrary value into the normalized range: clamp to
/// `[-1, 1 - ulp]`, round to nearest, then compress.
pub fn quantize_normalized(v: &DyadicRational, c: PositConfig) -> NormalizedPositPattern {
    let hi = max_normalized(c);
    let p = if *v >= posit::decode_value(hi).expect("finite") {
        hi
    } else if *v <= DyadicRational::from_int(-1) {
        neg_one(c)
    } else {
        encode_round(v, c)
    };
    compress(p).expect("clamped value is in range")
}
