//! Two's-complement and sign-magnitude fixed point, linear quantization, and
//! the MAC datapath arithmetic: `M×M` multiply into `2M` bits, `3M`-bit
//! accumulation and ReLU.

use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::posit::format_bits;

/// Widest user-facing word.
pub const MAX_M: u32 = 32;
/// Widest internal word (a `3M` accumulator at `M = 32`).
const MAX_WIDE_M: u32 = 3 * MAX_M;

/// `FxP(m, f)`: `m`-bit two's complement with `f` fraction bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FxpConfig {
    m: u32,
    f: u32,
}

impl FxpConfig {
    pub fn new(m: u32, f: u32) -> Result<Self> {
        if !(2..=MAX_M).contains(&m) || f >= m {
            return Err(Error::InvalidFxpConfig { m, f });
        }
        Ok(FxpConfig { m, f })
    }

    /// `FxP(m, m - 1)`: one sign bit, everything else fraction.
    pub fn normalized(m: u32) -> Result<Self> {
        Self::new(m, m.saturating_sub(1))
    }

    fn wide(m: u32, f: u32) -> Self {
        debug_assert!(m <= MAX_WIDE_M && f < m);
        FxpConfig { m, f }
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn f(self) -> u32 {
        self.f
    }

    /// Product format `(2m, 2f)`.
    pub fn product(self) -> FxpConfig {
        Self::wide(2 * self.m, 2 * self.f)
    }

    /// Accumulator format `(3m, 2f)`.
    pub fn accumulator(self) -> FxpConfig {
        Self::wide(3 * self.m, 2 * self.f)
    }

    pub fn min_bits(self) -> i128 {
        -(1i128 << (self.m - 1))
    }

    pub fn max_bits(self) -> i128 {
        (1i128 << (self.m - 1)) - 1
    }

    pub fn step(self) -> DyadicRational {
        DyadicRational::pow2(-(self.f as i64))
    }
}

impl fmt::Display for FxpConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FxP({},{})", self.m, self.f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FxpPattern {
    config: FxpConfig,
    bits: i128,
}

impl FxpPattern {
    pub fn new(config: FxpConfig, bits: i128) -> Result<Self> {
        if bits < config.min_bits() || bits > config.max_bits() {
            return Err(Error::PatternTooWide {
                bits: bits as u64,
                width: config.m,
            });
        }
        Ok(FxpPattern { config, bits })
    }

    pub fn zero(config: FxpConfig) -> Self {
        FxpPattern { config, bits: 0 }
    }

    fn saturating(config: FxpConfig, bits: i128) -> (Self, bool) {
        let clamped = bits.clamp(config.min_bits(), config.max_bits());
        (FxpPattern { config, bits: clamped }, clamped != bits)
    }

    pub fn config(self) -> FxpConfig {
        self.config
    }

    pub fn bits(self) -> i128 {
        self.bits
    }

    pub fn value(self) -> DyadicRational {
        DyadicRational::from_scaled(self.bits, self.config.f)
    }

    pub fn to_f64(self) -> f64 {
        self.bits as f64 / 2f64.powi(self.config.f as i32)
    }

    /// Two's-complement bit string, MSB first.
    pub fn to_bit_string(self) -> String {
        let mask = if self.config.m >= 128 {
            u128::MAX
        } else {
            (1u128 << self.config.m) - 1
        };
        let raw = self.bits as u128 & mask;
        if self.config.m <= 64 {
            format_bits(raw as u64, self.config.m)
        } else {
            format!(
                "{}{}",
                format_bits((raw >> 64) as u64, self.config.m - 64),
                format_bits(raw as u64, 64)
            )
        }
    }
}

impl fmt::Display for FxpPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

/// Rounding used when a wider result is narrowed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Requant {
    /// Drop the low bits (floor, as a hardware truncation does).
    Truncate,
    /// Nearest, ties to even.
    #[default]
    RoundNearest,
}

/// Nearest representable value, ties to even, saturating at the ends.
pub fn fxp_quantize(v: &DyadicRational, c: FxpConfig) -> FxpPattern {
    let scaled = v.round_scaled_half_even(c.f);
    let bits = scaled
        .to_i128()
        .unwrap_or(if v.is_negative() { i128::MIN } else { i128::MAX });
    FxpPattern::saturating(c, bits).0
}

/// Like [`fxp_quantize`], with `Truncate` rounding toward −∞.
pub fn fxp_quantize_with(v: &DyadicRational, c: FxpConfig, mode: Requant) -> FxpPattern {
    let scaled = match mode {
        Requant::RoundNearest => return fxp_quantize(v, c),
        Requant::Truncate => v.floor_scaled(c.f),
    };
    let bits = scaled
        .to_i128()
        .unwrap_or(if v.is_negative() { i128::MIN } else { i128::MAX });
    FxpPattern::saturating(c, bits).0
}

/// Exact product in `(2m, 2f)`.
pub fn fxp_multiply(a: FxpPattern, b: FxpPattern) -> Result<FxpPattern> {
    if a.config != b.config {
        return Err(Error::ConfigMismatch);
    }
    Ok(FxpPattern {
        config: a.config.product(),
        bits: a.bits * b.bits,
    })
}

/// Adds a `(2m, 2f)` product into a `(3m, 2f)` accumulator. The flag reports
/// saturation, which needs more than `2^m` maximal addends to happen.
pub fn fxp_accumulate(acc: FxpPattern, addend: FxpPattern) -> Result<(FxpPattern, bool)> {
    let (ac, pc) = (acc.config, addend.config);
    if pc.m % 2 != 0 || ac.m != pc.m / 2 * 3 || ac.f != pc.f {
        return Err(Error::ConfigMismatch);
    }
    Ok(FxpPattern::saturating(ac, acc.bits + addend.bits))
}

/// A `3m`-bit accumulator with a sticky saturation counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Accumulator {
    value: FxpPattern,
    saturations: u64,
}

impl Accumulator {
    /// An empty accumulator for products of `operand` words.
    pub fn new(operand: FxpConfig) -> Self {
        Accumulator {
            value: FxpPattern::zero(operand.accumulator()),
            saturations: 0,
        }
    }

    pub fn add(&mut self, product: FxpPattern) -> Result<()> {
        let (v, sat) = fxp_accumulate(self.value, product)?;
        self.value = v;
        self.saturations += sat as u64;
        Ok(())
    }

    pub fn value(&self) -> FxpPattern {
        self.value
    }

    pub fn saturations(&self) -> u64 {
        self.saturations
    }
}

pub fn relu(p: FxpPattern) -> FxpPattern {
    FxpPattern {
        config: p.config,
        bits: p.bits.max(0),
    }
}

/// Narrows (or widens) to `target`, saturating at its range.
pub fn requantize(p: FxpPattern, target: FxpConfig, mode: Requant) -> FxpPattern {
    let (sf, tf) = (p.config.f, target.f);
    let bits = if tf >= sf {
        let up = tf - sf;
        p.bits.checked_shl(up).filter(|b| b >> up == p.bits).unwrap_or(if p.bits < 0 {
            i128::MIN
        } else {
            i128::MAX
        })
    } else {
        let d = sf - tf;
        let floor = p.bits >> d;
        match mode {
            Requant::Truncate => floor,
            Requant::RoundNearest => {
                let rem = p.bits - (floor << d);
                let half = 1i128 << (d - 1);
                if rem > half || (rem == half && floor & 1 == 1) {
                    floor + 1
                } else {
                    floor
                }
            }
        }
    };
    FxpPattern::saturating(target, bits).0
}

/// Sign-magnitude word: one sign bit and `m - 1` magnitude bits, `f`
/// fraction bits. `overflow` marks an unrepresentable converter result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignMagPattern {
    pub config: FxpConfig,
    pub sign: bool,
    pub magnitude: u64,
    pub overflow: bool,
}

impl SignMagPattern {
    pub fn value(&self) -> DyadicRational {
        DyadicRational::from_parts(self.sign, self.magnitude, -(self.config.f as i64))
    }

    pub fn magnitude_width(&self) -> u32 {
        self.config.m - 1
    }

    pub fn magnitude_string(&self) -> String {
        format_bits(self.magnitude, self.magnitude_width())
    }

    pub fn to_bit_string(&self) -> String {
        format!("{}{}", self.sign as u8, self.magnitude_string())
    }
}

/// Value-preserving conversion; negative zero becomes zero.
pub fn signmag_to_twos(s: SignMagPattern) -> Result<FxpPattern> {
    if s.overflow {
        return Err(Error::Overflow);
    }
    let mag = s.magnitude as i128;
    FxpPattern::new(s.config, if s.sign { -mag } else { mag })
}
