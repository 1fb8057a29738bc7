//! Arbitrary-precision integer with an inline `i128` fast path.
//!
//! Almost every value produced on desk-sized grids fits in 128 bits, so the
//! heap-backed [`BigInt`] is only materialized on overflow. The representation
//! is normalized: `Big` never holds a value that fits in `i128`, which makes
//! the derived `Eq`/`Hash` structural equality coincide with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Int {
    Small(i128),
    Big(BigInt),
}

impl Int {
    pub const ZERO: Int = Int::Small(0);
    pub const ONE: Int = Int::Small(1);

    pub fn from_big(b: BigInt) -> Int {
        match b.to_i128() {
            Some(v) => Int::Small(v),
            None => Int::Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn signum(&self) -> i32 {
        match self {
            Int::Small(v) => v.signum() as i32,
            Int::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn abs(&self) -> Int {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Number of trailing zero bits; `None` for zero.
    pub fn trailing_zeros(&self) -> Option<u32> {
        match self {
            Int::Small(0) => None,
            Int::Small(v) => Some(v.trailing_zeros()),
            Int::Big(b) => b.trailing_zeros().map(|t| t as u32),
        }
    }

    /// `self * 2^s`.
    pub fn shl(&self, s: u32) -> Int {
        if s == 0 {
            return self.clone();
        }
        match self {
            Int::Small(0) => Int::ZERO,
            Int::Small(v) => {
                if s < 127 {
                    let shifted = v << s;
                    if shifted >> s == *v {
                        return Int::Small(shifted);
                    }
                }
                Int::from_big(BigInt::from(*v) << s as usize)
            }
            Int::Big(b) => Int::Big(b << s as usize),
        }
    }

    /// `floor(self / 2^s)`.
    pub fn shr_floor(&self, s: u32) -> Int {
        match self {
            Int::Small(v) => {
                if s >= 127 {
                    Int::Small(if *v < 0 { -1 } else { 0 })
                } else {
                    Int::Small(v >> s)
                }
            }
            Int::Big(b) => Int::from_big(b >> s as usize),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Int::Small(v) => *v as f64,
            Int::Big(b) => b.to_f64().unwrap_or(if b.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => i64::try_from(*v).ok(),
            Int::Big(_) => None,
        }
    }

    /// Scales `self` by `2^e` exactly and converts, splitting the exponent so
    /// huge integers with large negative `e` do not overflow to infinity.
    pub fn to_f64_scaled(&self, e: i32) -> f64 {
        match self {
            Int::Small(v) => (*v as f64) * 2f64.powi(e),
            Int::Big(b) => {
                let bits = b.bits() as i32;
                let drop = (bits - 120).max(0);
                let head = Int::from_big(b >> drop as usize).to_f64();
                head * 2f64.powi(e + drop)
            }
        }
    }
}

impl Default for Int {
    fn default() -> Self {
        Int::ZERO
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Small(v as i128)
    }
}

impl From<i32> for Int {
    fn from(v: i32) -> Self {
        Int::Small(v as i128)
    }
}

impl From<i128> for Int {
    fn from(v: i128) -> Self {
        Int::Small(v)
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Self {
        Int::from_big(v)
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => write!(f, "{v}"),
            Int::Big(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for Int {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<i128>() {
            return Ok(Int::Small(v));
        }
        s.parse::<BigInt>().map(Int::from_big)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident, $op:tt) => {
        impl $tr<&Int> for &Int {
            type Output = Int;
            fn $method(self, rhs: &Int) -> Int {
                if let (Int::Small(a), Int::Small(b)) = (self, rhs) {
                    if let Some(v) = a.$checked(*b) {
                        return Int::Small(v);
                    }
                }
                Int::from_big(self.to_big() $op rhs.to_big())
            }
        }
        impl $tr<Int> for Int {
            type Output = Int;
            fn $method(self, rhs: Int) -> Int {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Int> for Int {
            type Output = Int;
            fn $method(self, rhs: &Int) -> Int {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, checked_add, +);
binop!(Sub, sub, checked_sub, -);
binop!(Mul, mul, checked_mul, *);

impl Neg for &Int {
    type Output = Int;
    fn neg(self) -> Int {
        match self {
            Int::Small(v) => match v.checked_neg() {
                Some(n) => Int::Small(n),
                None => Int::from_big(-BigInt::from(*v)),
            },
            Int::Big(b) => Int::from_big(-b.clone()),
        }
    }
}

impl Neg for Int {
    type Output = Int;
    fn neg(self) -> Int {
        -&self
    }
}

impl Zero for Int {
    fn zero() -> Self {
        Int::ZERO
    }
    fn is_zero(&self) -> bool {
        Int::is_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Int::Small(i128::MAX);
        let sum = &big + &Int::ONE;
        assert!(matches!(sum, Int::Big(_)));
        let back = &sum - &Int::ONE;
        assert_eq!(back, Int::Small(i128::MAX));
        let sq = &big * &big;
        assert_eq!(sq.to_big(), BigInt::from(i128::MAX) * BigInt::from(i128::MAX));
        assert_eq!(-Int::Small(i128::MIN), Int::from_big(-BigInt::from(i128::MIN)));
    }

    #[test]
    fn shifts() {
        assert_eq!(Int::from(3i64).shl(4), Int::from(48i64));
        assert_eq!(Int::from(-7i64).shr_floor(1), Int::from(-4i64));
        let huge = Int::ONE.shl(200);
        assert_eq!(huge.trailing_zeros(), Some(200));
        assert_eq!(huge.shr_floor(200), Int::ONE);
        assert_eq!(Int::ZERO.trailing_zeros(), None);
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["0", "-17", "340282366920938463463374607431768211456123"] {
            let v: Int = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
    }
}
