//! Posit(N, ES) patterns: field decoding, exact values, correctly rounded
//! encoding and reference arithmetic.
//!
//! A pattern is `sign | regime | exponent | fraction`. The regime is the run
//! of identical bits after the sign: a run of `m` zeros gives `k = -m`, a run
//! of `m` ones gives `k = m - 1`. The value is
//! `(-1)^s · useed^k · 2^e · 1.f` with `useed = 2^(2^es)`. Negative patterns
//! are decoded by two's-complementing the low `n - 1` bits first, the same
//! way the bit-level converter in [`crate::pofx`] does it.
//!
//! Rounding is to the nearest value, ties to the pattern whose last bit is
//! zero, saturating at ±maxpos. Unlike the posit standard, a value at or
//! below half of minpos rounds to zero.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};

pub const MAX_N: u32 = 32;
pub const MAX_ES: u32 = 5;
/// Largest `n` accepted by [`enumerate_all`].
pub const MAX_ENUMERATE_N: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PositConfig {
    n: u32,
    es: u32,
}

impl PositConfig {
    pub fn new(n: u32, es: u32) -> Result<Self> {
        if !(2..=MAX_N).contains(&n) || es > MAX_ES {
            return Err(Error::InvalidPositConfig { n, es });
        }
        Ok(PositConfig { n, es })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn es(self) -> u32 {
        self.es
    }

    pub fn mask(self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1 << self.n) - 1
        }
    }

    pub fn nar_bits(self) -> u32 {
        1 << (self.n - 1)
    }

    pub fn maxpos_bits(self) -> u32 {
        self.nar_bits() - 1
    }

    /// `log2(maxpos) = (n - 2) · 2^es`; `log2(minpos)` is its negation.
    pub fn max_scale(self) -> i32 {
        ((self.n - 2) << self.es) as i32
    }

    pub fn min_scale(self) -> i32 {
        -self.max_scale()
    }

    pub fn maxpos(self) -> DyadicRational {
        DyadicRational::pow2(self.max_scale() as i64)
    }

    pub fn minpos(self) -> DyadicRational {
        DyadicRational::pow2(self.min_scale() as i64)
    }
}

impl fmt::Display for PositConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Posit({},{})", self.n, self.es)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PositPattern {
    config: PositConfig,
    bits: u32,
}

impl PositPattern {
    pub fn new(config: PositConfig, bits: u32) -> Result<Self> {
        if bits & !config.mask() != 0 {
            return Err(Error::PatternTooWide {
                bits: bits as u64,
                width: config.n,
            });
        }
        Ok(PositPattern { config, bits })
    }

    pub(crate) fn from_masked(config: PositConfig, bits: u32) -> Self {
        PositPattern {
            config,
            bits: bits & config.mask(),
        }
    }

    /// Parses an MSB-first string of exactly `n` binary digits.
    pub fn from_bit_str(config: PositConfig, s: &str) -> Result<Self> {
        Self::new(config, parse_bits(s, config.n)?)
    }

    pub fn zero(config: PositConfig) -> Self {
        PositPattern { config, bits: 0 }
    }

    pub fn nar(config: PositConfig) -> Self {
        PositPattern {
            config,
            bits: config.nar_bits(),
        }
    }

    pub fn maxpos(config: PositConfig) -> Self {
        PositPattern {
            config,
            bits: config.maxpos_bits(),
        }
    }

    pub fn config(self) -> PositConfig {
        self.config
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn bit(self, i: u32) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn is_nar(self) -> bool {
        self.bits == self.config.nar_bits()
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn is_negative(self) -> bool {
        self.bit(self.config.n - 1)
    }

    /// The pattern read as an `n`-bit two's-complement integer. Ordering by
    /// this key is numeric ordering, with NaR sorting below everything.
    pub fn as_signed(self) -> i64 {
        let n = self.config.n;
        let b = self.bits as i64;
        if self.is_negative() {
            b - (1i64 << n)
        } else {
            b
        }
    }

    pub fn to_bit_string(self) -> String {
        format_bits(self.bits as u64, self.config.n)
    }
}

impl fmt::Display for PositPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

pub(crate) fn parse_bits(s: &str, width: u32) -> Result<u32> {
    let s = s.trim();
    if s.len() != width as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::MalformedBits(s.to_string()));
    }
    Ok(s.bytes().fold(0u32, |acc, b| (acc << 1) | (b - b'0') as u32))
}

pub(crate) fn format_bits(bits: u64, width: u32) -> String {
    (0..width)
        .rev()
        .map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Decoded posit fields. `frac_bits < 2^frac_len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PositFields {
    /// `+1` or `-1`.
    pub sign: i8,
    pub k: i32,
    pub e: u32,
    pub frac_bits: u32,
    pub frac_len: u32,
}

impl PositFields {
    /// `k · 2^es + e`: the binary exponent of the leading one.
    pub fn scale(&self, es: u32) -> i32 {
        (self.k << es) + self.e as i32
    }

    /// Fraction as an exact value in `[0, 1)`.
    pub fn fraction(&self) -> DyadicRational {
        DyadicRational::from_parts(false, self.frac_bits, -(self.frac_len as i64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoded {
    Zero,
    NaR,
    Fields(PositFields),
}

/// Applies the field-extraction rule to any pattern, including 0 and NaR
/// (for which it reports the all-zero regime run, `k = -(n - 1)`).
pub fn raw_fields(p: PositPattern) -> PositFields {
    let n = p.config.n;
    let es = p.config.es;
    let body_width = n - 1;
    let body_mask = p.config.mask() >> 1;
    let sign_set = p.is_negative();
    let body = if sign_set {
        (!p.bits).wrapping_add(1) & body_mask
    } else {
        p.bits & body_mask
    };

    let lead = (body >> (body_width - 1)) & 1;
    // Length of the leading run of `lead` bits within the body.
    let run = {
        let probe = if lead == 1 { !body & body_mask } else { body };
        if probe == 0 {
            body_width
        } else {
            body_width - (32 - probe.leading_zeros())
        }
    };
    let k = if lead == 1 { run as i32 - 1 } else { -(run as i32) };
    let regime_len = (run + 1).min(body_width);
    let rest = body_width - regime_len;
    let exp_present = es.min(rest);
    let frac_len = rest - exp_present;
    let rest_bits = body & low_mask(rest);
    let e_raw = rest_bits >> frac_len;
    let e = e_raw << (es - exp_present);
    PositFields {
        sign: if sign_set { -1 } else { 1 },
        k,
        e,
        frac_bits: rest_bits & low_mask(frac_len),
        frac_len,
    }
}

fn low_mask(width: u32) -> u32 {
    if width >= 32 {
        u32::MAX
    } else {
        (1 << width) - 1
    }
}

pub fn decode_fields(p: PositPattern) -> Decoded {
    if p.is_zero() {
        Decoded::Zero
    } else if p.is_nar() {
        Decoded::NaR
    } else {
        Decoded::Fields(raw_fields(p))
    }
}

/// Exact value of the pattern; `None` for NaR.
pub fn decode_value(p: PositPattern) -> Option<DyadicRational> {
    match decode_fields(p) {
        Decoded::Zero => Some(DyadicRational::zero()),
        Decoded::NaR => None,
        Decoded::Fields(f) => {
            let mant = (1u64 << f.frac_len) | f.frac_bits as u64;
            let exp = f.scale(p.config.es) as i64 - f.frac_len as i64;
            Some(DyadicRational::from_parts(f.sign < 0, mant, exp))
        }
    }
}

/// Two's complement of the whole pattern. Zero and NaR map to themselves.
pub fn negate(p: PositPattern) -> PositPattern {
    PositPattern::from_masked(p.config, (!p.bits).wrapping_add(1))
}

/// Bits of the positive pattern obtained by truncating the infinite
/// encoding of a value with the given scale to `n - 1` body bits.
///
/// `frac_top` yields the leading `len` fraction bits of the significand and
/// whether anything nonzero lies below them.
fn truncated_body(
    c: PositConfig,
    scale: i32,
    frac_top: impl Fn(u32) -> (u32, bool),
) -> (u32, bool) {
    let es = c.es;
    let body_width = c.n - 1;
    let k = scale.div_euclid(1 << es);
    let e = scale.rem_euclid(1 << es) as u32;
    let (regime, regime_len) = if k >= 0 {
        let ones = k as u32 + 1;
        (low_mask(ones) << 1, ones + 1)
    } else {
        (1u32, (-k) as u32 + 1)
    };
    debug_assert!(regime_len <= body_width);
    let avail = body_width - regime_len;
    let (body, inexact) = if avail <= es {
        let dropped = es - avail;
        let (_, frac_nonzero) = frac_top(0);
        (
            e >> dropped,
            (e & low_mask(dropped)) != 0 || frac_nonzero,
        )
    } else {
        let want = avail - es;
        let (f, rest) = frac_top(want);
        ((e << want) | f, rest)
    };
    ((regime << avail) | body, inexact)
}

/// Rounds an exact value to the nearest `Posit(c)` pattern.
///
/// Ties go to the pattern with an even last bit; magnitudes beyond maxpos
/// saturate; zero maps to the zero pattern. Never returns NaR.
pub fn encode_round(v: &DyadicRational, c: PositConfig) -> PositPattern {
    if v.is_zero() {
        return PositPattern::zero(c);
    }
    if v.is_negative() {
        return negate(encode_round(&v.abs(), c));
    }
    if *v >= c.maxpos() {
        return PositPattern::maxpos(c);
    }
    let scale = v.floor_log2().expect("nonzero") as i32;
    if scale < c.min_scale() {
        let half_minpos = DyadicRational::pow2(c.min_scale() as i64 - 1);
        return if *v > half_minpos {
            PositPattern::from_masked(c, 1)
        } else {
            PositPattern::zero(c)
        };
    }

    let mant = v.mantissa();
    let fw = (mant.bits() - 1) as u32;
    let frac = mant - (BigUint::one() << fw);
    let frac_top = |len: u32| -> (u32, bool) {
        if len >= fw {
            let top = (&frac << (len - fw)).to_u32().expect("fits");
            (top, false)
        } else {
            let drop = fw - len;
            let top = (&frac >> drop).to_u32().expect("fits");
            let below = &frac - (BigUint::from(top) << drop);
            (top, below.bits() > 0)
        }
    };
    let (lo_bits, inexact) = truncated_body(c, scale, frac_top);
    let lo = PositPattern::from_masked(c, lo_bits);
    if !inexact {
        return lo;
    }
    let hi = PositPattern::from_masked(c, lo_bits + 1);
    let lo_v = decode_value(lo).expect("finite");
    let hi_v = decode_value(hi).expect("finite");
    let twice = v.mul_pow2(1);
    match twice.cmp(&(&lo_v + &hi_v)) {
        std::cmp::Ordering::Less => lo,
        std::cmp::Ordering::Greater => hi,
        std::cmp::Ordering::Equal => {
            if lo_bits & 1 == 0 {
                lo
            } else {
                hi
            }
        }
    }
}

/// Posit operand unpacked for integer arithmetic: `±(2^frac_len + frac) ·
/// 2^(scale - frac_len)`.
#[derive(Clone, Copy, Debug)]
struct Unpacked {
    negative: bool,
    scale: i32,
    sig: u64,
    frac_len: u32,
}

fn unpack(p: PositPattern) -> Option<Unpacked> {
    match decode_fields(p) {
        Decoded::Fields(f) => Some(Unpacked {
            negative: f.sign < 0,
            scale: f.scale(p.config.es),
            sig: (1u64 << f.frac_len) | f.frac_bits as u64,
            frac_len: f.frac_len,
        }),
        _ => None,
    }
}

/// Rounds the exact value `±sig · 2^(scale - 127)` (leading one of `sig` at
/// bit 127) to a pattern, nearest by value with ties to even.
fn pack_round(c: PositConfig, negative: bool, scale: i32, sig: u128) -> PositPattern {
    debug_assert_eq!(sig >> 127, 1);
    let pos = pack_round_positive(c, scale, sig);
    if negative {
        negate(pos)
    } else {
        pos
    }
}

fn pack_round_positive(c: PositConfig, scale: i32, sig: u128) -> PositPattern {
    let exact_power = sig == 1u128 << 127;
    if scale >= c.max_scale() {
        return PositPattern::maxpos(c);
    }
    if scale < c.min_scale() {
        let above_half = scale == c.min_scale() - 1 && !exact_power;
        return PositPattern::from_masked(c, above_half as u32);
    }
    let frac = sig & !(1u128 << 127);
    let frac_top = |len: u32| -> (u32, bool) {
        let drop = 127 - len;
        ((frac >> drop) as u32, frac & ((1u128 << drop) - 1) != 0)
    };
    let (lo_bits, inexact) = truncated_body(c, scale, frac_top);
    let lo = PositPattern::from_masked(c, lo_bits);
    if !inexact {
        return lo;
    }
    let hi = PositPattern::from_masked(c, lo_bits + 1);
    let ul = unpack(lo).expect("finite lo");
    let uh = unpack(hi).expect("finite hi");

    // Fixed point with 64 fraction bits relative to 2^(lo scale). The value
    // and both neighbours lie within 2^(2^es) of lo, so this fits in u128.
    let d = (scale - ul.scale) as u32;
    let lo_fx = (ul.sig as u128) << (64 - ul.frac_len);
    let hi_fx = (uh.sig as u128) << (64 - uh.frac_len + (uh.scale - ul.scale) as u32);
    let drop = 63 - d;
    let v_fx = sig >> drop;
    let below = sig & ((1u128 << drop) - 1) != 0;
    match (2 * v_fx).cmp(&(lo_fx + hi_fx)) {
        std::cmp::Ordering::Less => lo,
        std::cmp::Ordering::Greater => hi,
        std::cmp::Ordering::Equal if below => hi,
        std::cmp::Ordering::Equal => {
            if lo_bits & 1 == 0 {
                lo
            } else {
                hi
            }
        }
    }
}

fn check_same(a: PositPattern, b: PositPattern) -> Result<PositConfig> {
    if a.config != b.config {
        return Err(Error::ConfigMismatch);
    }
    Ok(a.config)
}

/// Correctly rounded sum, computed with integer significands.
pub fn posit_add(a: PositPattern, b: PositPattern) -> Result<PositPattern> {
    let c = check_same(a, b)?;
    if a.is_nar() || b.is_nar() {
        return Ok(PositPattern::nar(c));
    }
    let (Some(ua), Some(ub)) = (unpack(a), unpack(b)) else {
        return Ok(if a.is_zero() { b } else { a });
    };
    // Leading one of each significand placed at bit 100.
    let place = |u: &Unpacked| (u.sig as u128) << (100 - u.frac_len);
    let a_big = (ua.scale, place(&ua)) >= (ub.scale, place(&ub));
    let (big, small) = if a_big { (ua, ub) } else { (ub, ua) };
    let d = (big.scale - small.scale) as u32;
    // A posit has at most 29 fraction bits, so an addend 64 binades down
    // stays far below half an ulp of `big` and cannot move the result.
    if d >= 64 {
        return Ok(if a_big { a } else { b });
    }
    let sb = place(&big);
    let ss = place(&small) >> d; // exact: lowest bit lands at >= 100 - 29 - 63
    let (negative, sum) = if big.negative == small.negative {
        (big.negative, sb + ss)
    } else {
        (big.negative, sb - ss)
    };
    if sum == 0 {
        return Ok(PositPattern::zero(c));
    }
    let lead = 127 - sum.leading_zeros() as i32;
    let scale = big.scale + (lead - 100);
    Ok(pack_round(c, negative, scale, sum << (127 - lead)))
}

/// Correctly rounded product, computed with integer significands.
pub fn posit_mul(a: PositPattern, b: PositPattern) -> Result<PositPattern> {
    let c = check_same(a, b)?;
    if a.is_nar() || b.is_nar() {
        return Ok(PositPattern::nar(c));
    }
    let (Some(ua), Some(ub)) = (unpack(a), unpack(b)) else {
        return Ok(PositPattern::zero(c));
    };
    let prod = ua.sig as u128 * ub.sig as u128;
    let frac_len = (ua.frac_len + ub.frac_len) as i32;
    let lead = 127 - prod.leading_zeros() as i32;
    let scale = ua.scale + ub.scale + (lead - frac_len);
    Ok(pack_round(
        c,
        ua.negative != ub.negative,
        scale,
        prod << (127 - lead),
    ))
}

/// Sums all products exactly and rounds once at the end.
pub fn posit_fma_accumulate<I>(config: PositConfig, products: I) -> Result<PositPattern>
where
    I: IntoIterator<Item = (PositPattern, PositPattern)>,
{
    let mut acc = DyadicRational::zero();
    for (a, b) in products {
        if a.config != config || b.config != config {
            return Err(Error::ConfigMismatch);
        }
        match (decode_value(a), decode_value(b)) {
            (Some(x), Some(y)) => acc = &acc + &(&x * &y),
            _ => return Ok(PositPattern::nar(config)),
        }
    }
    Ok(encode_round(&acc, config))
}

/// All `2^n` patterns in ascending bit order with their values.
pub fn enumerate_all(c: PositConfig) -> Result<Vec<(PositPattern, Option<DyadicRational>)>> {
    if c.n > MAX_ENUMERATE_N {
        return Err(Error::EnumerationTooLarge(c.n));
    }
    Ok((0..1u32 << c.n)
        .map(|bits| {
            let p = PositPattern::from_masked(c, bits);
            (p, decode_value(p))
        })
        .collect())
}
