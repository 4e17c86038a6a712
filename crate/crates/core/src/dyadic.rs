//! Exact dyadic rationals: values of the form `±mantissa · 2^exp2`.
//!
//! Every posit and fixed-point value is dyadic, so this type serves as the
//! exact reference for conversions and arithmetic. It is closed under
//! addition, subtraction and multiplication; nothing here ever rounds unless
//! a method says so by name.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact value `sign · mantissa · 2^exp2`, kept canonical: the mantissa is
/// odd, or the value is zero with `exp2 == 0` and no sign.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    sign: Sign,
    mantissa: BigUint,
    exp2: i64,
}

impl DyadicRational {
    pub fn zero() -> Self {
        DyadicRational {
            sign: Sign::NoSign,
            mantissa: BigUint::zero(),
            exp2: 0,
        }
    }

    pub fn one() -> Self {
        Self::pow2(0)
    }

    /// `2^exp2`.
    pub fn pow2(exp2: i64) -> Self {
        DyadicRational {
            sign: Sign::Plus,
            mantissa: BigUint::one(),
            exp2,
        }
    }

    /// Builds `(-1)^negative · mantissa · 2^exp2` and canonicalizes it.
    pub fn from_parts(negative: bool, mantissa: impl Into<BigUint>, exp2: i64) -> Self {
        let mantissa = mantissa.into();
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        DyadicRational {
            sign: if negative { Sign::Minus } else { Sign::Plus },
            mantissa: mantissa >> tz,
            exp2: exp2 + tz as i64,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_parts(v < 0, v.unsigned_abs(), 0)
    }

    /// The value `scaled / 2^frac_bits`.
    pub fn from_scaled(scaled: i128, frac_bits: u32) -> Self {
        Self::from_parts(scaled < 0, scaled.unsigned_abs(), -(frac_bits as i64))
    }

    /// The value `scaled / 2^frac_bits` for a big integer numerator.
    pub fn from_scaled_big(scaled: &BigInt, frac_bits: u32) -> Self {
        Self::from_parts(
            scaled.is_negative(),
            scaled.magnitude().clone(),
            -(frac_bits as i64),
        )
    }

    /// Lossless import of a binary32 value. `None` for NaN and infinities.
    pub fn from_f32(v: f32) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let bits = v.to_bits();
        let negative = bits >> 31 == 1;
        let biased = ((bits >> 23) & 0xff) as i64;
        let frac = (bits & 0x7f_ffff) as u64;
        let (mant, exp) = if biased == 0 {
            (frac, -126 - 23)
        } else {
            (frac | 1 << 23, biased - 127 - 23)
        };
        Some(Self::from_parts(negative, mant, exp))
    }

    /// Lossless import of a binary64 value. `None` for NaN and infinities.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let bits = v.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1022 - 52)
        } else {
            (frac | 1 << 52, biased - 1023 - 52)
        };
        Some(Self::from_parts(negative, mant, exp))
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::NoSign
    }

    pub fn is_negative(&self) -> bool {
        self.sign == Sign::Minus
    }

    /// −1, 0 or +1.
    pub fn signum(&self) -> i8 {
        match self.sign {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        if r.sign == Sign::Minus {
            r.sign = Sign::Plus;
        }
        r
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut r = self.clone();
        r.exp2 += k;
        r
    }

    /// `floor(log2 |v|)`, or `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mantissa.bits() as i64 - 1 + self.exp2)
        }
    }

    /// Signed big-integer numerator at scale `2^frac_bits`, when exact.
    fn scaled_exact(&self, frac_bits: u32) -> Option<BigInt> {
        let shift = self.exp2 + frac_bits as i64;
        if shift < 0 {
            return None;
        }
        let mag = &self.mantissa << (shift as u64);
        Some(BigInt::from_biguint(self.sign, mag))
    }

    /// `(floor(|v|·2^f), remainder bits were nonzero, exact half)`.
    fn split_scaled(&self, frac_bits: u32) -> (BigUint, bool, Ordering) {
        let shift = self.exp2 + frac_bits as i64;
        if shift >= 0 {
            return (&self.mantissa << (shift as u64), false, Ordering::Less);
        }
        let drop = (-shift) as u64;
        let int = &self.mantissa >> drop;
        let rem = &self.mantissa - (&int << drop);
        let half = BigUint::one() << (drop - 1);
        (int, !rem.is_zero(), rem.cmp(&half))
    }

    /// `v · 2^frac_bits` rounded toward zero.
    pub fn trunc_scaled(&self, frac_bits: u32) -> BigInt {
        let (int, _, _) = self.split_scaled(frac_bits);
        BigInt::from_biguint(self.sign, int)
    }

    /// `v · 2^frac_bits` rounded toward negative infinity.
    pub fn floor_scaled(&self, frac_bits: u32) -> BigInt {
        let (int, inexact, _) = self.split_scaled(frac_bits);
        let t = BigInt::from_biguint(self.sign, int);
        if inexact && self.is_negative() {
            t - 1
        } else {
            t
        }
    }

    /// `v · 2^frac_bits` rounded to the nearest integer, ties to even.
    pub fn round_scaled_half_even(&self, frac_bits: u32) -> BigInt {
        if let Some(exact) = self.scaled_exact(frac_bits) {
            return exact;
        }
        let (int, _, half_cmp) = self.split_scaled(frac_bits);
        let up = match half_cmp {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => int.is_odd(),
        };
        let mag = if up { int + 1u32 } else { int };
        BigInt::from_biguint(self.sign, mag)
    }

    /// Nearest `f64` (for reporting only; never used on exact paths).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Keep 64 leading bits; the tail only matters below f64 precision.
        let bits = self.mantissa.bits() as i64;
        let (m, e) = if bits > 64 {
            let drop = bits - 64;
            let top = (&self.mantissa >> drop as u64).to_u64().unwrap_or(u64::MAX);
            // sticky bit keeps ties from rounding the wrong way
            let sticky = self.mantissa.trailing_zeros().map_or(0, |t| (t < drop as u64) as u64);
            (top | sticky, self.exp2 + drop)
        } else {
            (self.mantissa.to_u64().unwrap_or(0), self.exp2)
        };
        let mut v = m as f64;
        let mut e = e;
        while e > 0 {
            let step = e.min(1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        while e < 0 {
            let step = (-e).min(1000);
            v /= 2f64.powi(step as i32);
            e += step;
        }
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    /// Exact decimal expansion (always finite for dyadic values).
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let sign = if self.is_negative() { "-" } else { "" };
        if self.exp2 >= 0 {
            return format!("{sign}{}", &self.mantissa << (self.exp2 as u64));
        }
        // m / 2^d = m·5^d / 10^d
        let d = (-self.exp2) as u32;
        let digits = (&self.mantissa * BigUint::from(5u32).pow(d)).to_string();
        let d = d as usize;
        let (int, frac) = if digits.len() > d {
            let (a, b) = digits.split_at(digits.len() - d);
            (a.to_string(), b.to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat(d - digits.len()), digits))
        };
        format!("{sign}{int}.{}", frac.trim_end_matches('0'))
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.signum(), other.signum());
        if a != b {
            return a.cmp(&b);
        }
        if a == 0 {
            return Ordering::Equal;
        }
        let e = self.exp2.min(other.exp2);
        let ma = &self.mantissa << (self.exp2 - e) as u64;
        let mb = &other.mantissa << (other.exp2 - e) as u64;
        let mag = ma.cmp(&mb);
        if a < 0 {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(mut self) -> DyadicRational {
        self.sign = -self.sign;
        self
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        -self.clone()
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exp2.min(rhs.exp2);
        let a = BigInt::from_biguint(self.sign, &self.mantissa << (self.exp2 - e) as u64);
        let b = BigInt::from_biguint(rhs.sign, &rhs.mantissa << (rhs.exp2 - e) as u64);
        let s = a + b;
        DyadicRational::from_parts(s.is_negative(), s.magnitude().clone(), e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        self + &(-rhs)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        if self.is_zero() || rhs.is_zero() {
            return DyadicRational::zero();
        }
        DyadicRational {
            sign: self.sign * rhs.sign,
            mantissa: &self.mantissa * &rhs.mantissa,
            exp2: self.exp2 + rhs.exp2,
        }
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: DyadicRational) -> DyadicRational {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $method(self, rhs: &DyadicRational) -> DyadicRational {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = DyadicRational>>(iter: I) -> Self {
        iter.fold(DyadicRational::zero(), |acc, x| &acc + &x)
    }
}
