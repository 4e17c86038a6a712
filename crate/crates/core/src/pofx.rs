//! Bit-level posit to fixed-point conversion.
//!
//! The converter is a feed-forward chain of five stages:
//!
//! * **A** sign extraction, conditional two's complement of the low `n - 1`
//!   bits, and a leading-ones detector (LZD) chain. When the regime starts
//!   with a zero the bits are inverted first so one detector handles both
//!   polarities.
//! * **B1** regime value `K` from the number `V` of ones in the LZD chain.
//! * **B2** exponent and fraction extraction through a one-hot silhouette
//!   marking the first bit after the regime terminator.
//! * **C** shift amount: `2^es·K + E` in general; for normalized inputs
//!   the right shift `2^es·|K| - E - 1`, formed by concatenating `|K| - 1`
//!   with the one's complement of `E`.
//! * **D** the shift itself, then **E** sign-magnitude to two's complement
//!   (see [`crate::fxp::signmag_to_twos`]).
//!
//! Bits shifted out are truncated, never rounded.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fxp::{FxpConfig, SignMagPattern};
use crate::normalized::{self, NormalizedPositPattern};
use crate::posit::{PositConfig, PositPattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    General,
    Normalized,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Variant::General),
            "normalized" => Ok(Variant::Normalized),
            _ => Err(Error::parse("converter variant", s)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConverterSpec {
    posit: PositConfig,
    fxp: FxpConfig,
    variant: Variant,
}

impl ConverterSpec {
    pub fn new(posit: PositConfig, fxp: FxpConfig, variant: Variant) -> Result<Self> {
        if variant == Variant::Normalized && fxp.f() + 1 != fxp.m() {
            return Err(Error::NormalizedFractionMismatch {
                m: fxp.m(),
                f: fxp.f(),
            });
        }
        Ok(ConverterSpec {
            posit,
            fxp,
            variant,
        })
    }

    /// Normalized converter to `FxP(m, m - 1)`.
    pub fn normalized(posit: PositConfig, m: u32) -> Result<Self> {
        Self::new(posit, FxpConfig::normalized(m)?, Variant::Normalized)
    }

    pub fn posit(&self) -> PositConfig {
        self.posit
    }

    pub fn fxp(&self) -> FxpConfig {
        self.fxp
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `ceil(log2(m))`.
    pub fn shift_register_width(&self) -> u32 {
        32 - (self.fxp.m() - 1).leading_zeros()
    }

    /// Logical position of the hidden one in MAG before the shift.
    fn hidden_at(&self) -> i32 {
        match self.variant {
            Variant::General => self.fxp.f() as i32,
            // stored just after the binary point
            Variant::Normalized => self.fxp.f() as i32 - 1,
        }
    }

    /// Guard bits below MAG[0], wide enough for every fraction bit.
    fn guard(&self) -> u32 {
        self.posit.n()
    }
}

/// The MAG register extended with guard bits below logical index 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct MagRegister {
    pub bits: u128,
    pub guard: u32,
}

impl MagRegister {
    fn set(&mut self, logical: i32, bit: bool) {
        let phys = logical + self.guard as i32;
        if bit && phys >= 0 {
            self.bits |= 1u128 << phys;
        }
    }

    /// Logical bits `[0, width)`, i.e. what survives truncation.
    pub fn integer_part(&self, width: u32) -> u64 {
        ((self.bits >> self.guard) & ((1u128 << width) - 1)) as u64
    }
}

/// Output of stage A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StageA {
    pub sign: bool,
    /// `POSIT[n-2:0]` after the conditional two's complement.
    pub posit_low: u32,
    /// `POSIT[n-2]` after A2: the regime polarity.
    pub regime_lead: bool,
    /// LZD input `P`: `posit_low`, inverted when the regime starts with 0.
    pub lzd_input: u32,
    /// Contiguous-ones mask from the top of `P`.
    pub lzd: u32,
    pub mag: MagRegister,
}

/// Stage A on an `n`-bit pattern (not zero, not NaR).
pub fn stage_a_prepare(spec: &ConverterSpec, p: PositPattern) -> StageA {
    let n = p.config().n();
    let low_mask = (1u32 << (n - 1)) - 1;
    // A1
    let sign = p.is_negative();
    let mut mag = MagRegister {
        bits: 0,
        guard: spec.guard(),
    };
    mag.set(spec.hidden_at(), true);
    // A2
    let posit_low = if sign {
        (!p.bits()).wrapping_add(1) & low_mask
    } else {
        p.bits() & low_mask
    };
    // A3
    let regime_lead = (posit_low >> (n - 2)) & 1 == 1;
    let lzd_input = if regime_lead {
        posit_low
    } else {
        !posit_low & low_mask
    };
    let top = n as i32 - 2;
    let mut lzd = lzd_input & (1 << top);
    for i in (0..top).rev() {
        let chain = (lzd >> (i + 1)) & 1 & (lzd_input >> i);
        lzd |= chain << i;
    }
    StageA {
        sign,
        posit_low,
        regime_lead,
        lzd_input,
        lzd,
        mag,
    }
}

/// Stage B1: `(V, K)` with `V` the ones in the LZD chain; `K = -V` for a
/// zero-led regime, `V - 1` otherwise.
pub fn regime_value(lzd: u32, regime_lead: bool) -> (u32, i32) {
    let v = lzd.count_ones();
    let k = if regime_lead { v as i32 - 1 } else { -(v as i32) };
    (v, k)
}

/// Stage B2: writes fraction bits into `mag` below the hidden one and
/// returns the exponent `E`. Exponent bits cut off by the regime read as 0.
pub fn silhouette_extract(
    spec: &ConverterSpec,
    posit_low: u32,
    lzd: u32,
    mag: &mut MagRegister,
) -> u32 {
    let n = spec.posit.n() as i32;
    let es = spec.posit.es() as i32;
    let bit = |x: u32, i: i32| i >= 0 && (x >> i) & 1 == 1;
    let top = n - 4;
    if top < 0 {
        return 0;
    }
    let ext: Vec<bool> = (0..=top).map(|i| !(bit(lzd, i + 1) || bit(lzd, i))).collect();
    let mut st = vec![false; ext.len()];
    st[top as usize] = ext[top as usize];
    for i in (0..top).rev() {
        st[i as usize] = ext[i as usize + 1] ^ ext[i as usize];
    }
    let switch = n - 4 - es;
    let h = spec.hidden_at();
    let mut e = 0u32;
    for i in 0..=top {
        let set = (0..=i).any(|j| st[(top - i + j) as usize] && bit(posit_low, j));
        if i <= switch {
            mag.set(h - 1 - switch + i, set);
        } else if set {
            e |= 1 << (i - 1 - switch);
        }
    }
    e
}

/// Stage C, general form: `2^es·K + E`, i.e. `K` with `es` zero bits
/// appended, plus `E`.
pub fn shift_amount_general(k: i32, e: u32, es: u32) -> i32 {
    (k << es) + e as i32
}

/// Stage C, normalized form. `k_mag = V = |K|`. The hidden one sits just
/// after the binary point, so the net right shift is `2^es·V - E - 1`,
/// which is exactly `V - 1` concatenated with the `es`-bit one's complement
/// of `E`. Overflow when the shift reaches `mag_width`.
pub fn shift_amount_normalized(k_mag: u32, e: u32, es: u32, mag_width: u32) -> (u32, bool) {
    debug_assert!(k_mag >= 1);
    let ones_comp = !e & ((1u32 << es) - 1);
    let right = ((k_mag - 1) << es) | ones_comp;
    (right, right >= mag_width)
}

/// Stage D: positive shifts go left, negative right.
pub fn stage_d_shift(mag: MagRegister, shift: i32) -> MagRegister {
    let bits = if shift >= 0 {
        mag.bits.checked_shl(shift as u32).unwrap_or(0)
    } else {
        mag.bits.checked_shr((-shift) as u32).unwrap_or(0)
    };
    MagRegister { bits, ..mag }
}

/// Per-stage record of one conversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct StageTrace {
    pub sign: bool,
    pub posit_low: u32,
    pub lzd_input: u32,
    pub lzd: u32,
    pub v: u32,
    pub k: i32,
    pub e: u32,
    pub mag_before: MagRegister,
    /// Signed shift; negative is to the right.
    pub shift: i32,
    pub mag_after: MagRegister,
    pub overflow: bool,
    pub neg_one_saturated: bool,
    pub zero: bool,
}

fn hex_signed(v: i64) -> String {
    if v < 0 {
        format!("-{:#x}", -v)
    } else {
        format!("{v:#x}")
    }
}

impl StageTrace {
    /// One stage per line, fields hex-encoded.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let b = |x: bool| x as u8;
        let _ = writeln!(
            s,
            "A sign={:#x} posit={:#x} lzd_in={:#x} lzd={:#x}",
            b(self.sign),
            self.posit_low,
            self.lzd_input,
            self.lzd
        );
        let _ = writeln!(s, "B1 v={:#x} k={}", self.v, hex_signed(self.k as i64));
        let _ = writeln!(
            s,
            "B2 e={:#x} mag={:#x} guard={:#x}",
            self.e, self.mag_before.bits, self.mag_before.guard
        );
        let _ = writeln!(s, "C shift={}", hex_signed(self.shift as i64));
        let _ = writeln!(s, "D mag={:#x}", self.mag_after.bits);
        let _ = writeln!(
            s,
            "E overflow={:#x} neg_one_saturated={:#x} zero={:#x}",
            b(self.overflow),
            b(self.neg_one_saturated),
            b(self.zero)
        );
        s
    }
}

impl fmt::Display for StageTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Converter input: a full pattern (general) or a stored normalized one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConverterInput {
    Posit(PositPattern),
    Normalized(NormalizedPositPattern),
}

impl From<PositPattern> for ConverterInput {
    fn from(p: PositPattern) -> Self {
        ConverterInput::Posit(p)
    }
}

impl From<NormalizedPositPattern> for ConverterInput {
    fn from(p: NormalizedPositPattern) -> Self {
        ConverterInput::Normalized(p)
    }
}

/// Runs all stages. The general variant takes full patterns, the normalized
/// variant stored `(n - 1)`-bit patterns (the leading bit is replicated
/// here, as part of stage A).
pub fn convert(
    spec: &ConverterSpec,
    input: impl Into<ConverterInput>,
) -> Result<(SignMagPattern, StageTrace)> {
    let p = match (spec.variant, input.into()) {
        (Variant::General, ConverterInput::Posit(p)) => p,
        (Variant::Normalized, ConverterInput::Normalized(np)) => normalized::expand(np),
        _ => return Err(Error::ConfigMismatch),
    };
    if p.config() != spec.posit {
        return Err(Error::ConfigMismatch);
    }
    if p.is_nar() {
        return Err(Error::NotAReal);
    }
    let fxp = spec.fxp;
    let mag_width = fxp.m() - 1;
    let mut out = SignMagPattern {
        config: fxp,
        sign: false,
        magnitude: 0,
        overflow: false,
    };
    if p.is_zero() {
        return Ok((
            out,
            StageTrace {
                zero: true,
                ..StageTrace::default()
            },
        ));
    }

    let a = stage_a_prepare(spec, p);
    let (v, k) = regime_value(a.lzd, a.regime_lead);
    let mut mag = a.mag;
    let e = silhouette_extract(spec, a.posit_low, a.lzd, &mut mag);
    let mut trace = StageTrace {
        sign: a.sign,
        posit_low: a.posit_low,
        lzd_input: a.lzd_input,
        lzd: a.lzd,
        v,
        k,
        e,
        mag_before: mag,
        ..StageTrace::default()
    };
    out.sign = a.sign;
    let all_ones = (1u64 << mag_width) - 1;

    match spec.variant {
        Variant::Normalized if a.regime_lead => {
            // Only −1 has a one-led regime after A2 here; sign-magnitude
            // with m - 1 magnitude bits cannot hold it.
            trace.neg_one_saturated = true;
            out.magnitude = all_ones;
            trace.mag_after = mag;
        }
        Variant::Normalized => {
            let (right, overflow) = shift_amount_normalized(v, e, spec.posit.es(), mag_width);
            trace.shift = -(right.min(i32::MAX as u32) as i32);
            trace.mag_after = stage_d_shift(mag, trace.shift);
            trace.overflow = overflow;
            out.overflow = overflow;
            out.magnitude = if overflow {
                0
            } else {
                trace.mag_after.integer_part(mag_width)
            };
        }
        Variant::General => {
            let shift = shift_amount_general(k, e, spec.posit.es());
            trace.shift = shift;
            let lands = spec.hidden_at() + shift;
            if lands >= mag_width as i32 {
                trace.overflow = true;
                trace.mag_after = mag;
                out.overflow = true;
                out.magnitude = all_ones;
            } else {
                trace.mag_after = stage_d_shift(mag, shift);
                let underflow = lands < 0;
                trace.overflow = underflow;
                out.overflow = underflow;
                out.magnitude = if underflow {
                    0
                } else {
                    trace.mag_after.integer_part(mag_width)
                };
            }
        }
    }
    Ok((out, trace))
}
