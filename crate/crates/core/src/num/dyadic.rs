//! Dyadic rationals `num / 2^exp`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::int::Int;

/// Exact number `num / 2^exp` in canonical form: `num` is odd, or `num = 0`
/// with `exp = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DyadicRational {
    num: Int,
    exp: i32,
}

impl DyadicRational {
    pub fn new(num: impl Into<Int>, exp: i32) -> Self {
        let num = num.into();
        match num.trailing_zeros() {
            None => DyadicRational { num: Int::ZERO, exp: 0 },
            Some(t) => DyadicRational {
                num: num.shr_floor(t),
                exp: exp - t as i32,
            },
        }
    }

    pub fn zero() -> Self {
        DyadicRational::default()
    }

    pub fn integer(v: i64) -> Self {
        DyadicRational::new(v, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i32) -> Self {
        DyadicRational { num: Int::ONE, exp: -e }
    }

    pub fn num(&self) -> &Int {
        &self.num
    }

    pub fn exp(&self) -> i32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn signum(&self) -> i32 {
        self.num.signum()
    }

    pub fn abs(&self) -> Self {
        DyadicRational { num: self.num.abs(), exp: self.exp }
    }

    /// `self * 2^e`.
    pub fn scale_pow2(&self, e: i32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        DyadicRational { num: self.num.clone(), exp: self.exp - e }
    }

    /// `floor(self / 2^s)` as an integer.
    pub fn floor_div_pow2(&self, s: i32) -> Int {
        let shift = self.exp + s;
        if shift >= 0 {
            self.num.shr_floor(shift as u32)
        } else {
            self.num.shl((-shift) as u32)
        }
    }

    /// Numerator over the common exponent `e >= self.exp`.
    fn aligned(&self, e: i32) -> Int {
        self.num.shl((e - self.exp) as u32)
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64_scaled(-self.exp)
    }

    /// Nearest dyadic with denominator `2^bits`, rounding toward zero.
    pub fn from_f64_truncated(x: f64, bits: i32) -> Self {
        let scaled = (x * 2f64.powi(bits)).trunc() as i64;
        DyadicRational::new(scaled, bits)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        self.aligned(e).cmp(&other.aligned(e))
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&DyadicRational> for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exp.max(rhs.exp);
        DyadicRational::new(self.aligned(e) + rhs.aligned(e), e)
    }
}

impl Sub<&DyadicRational> for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exp.max(rhs.exp);
        DyadicRational::new(self.aligned(e) - rhs.aligned(e), e)
    }
}

impl Mul<&DyadicRational> for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational { num: -&self.num, exp: self.exp }
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp <= 0 {
            write!(f, "{}", self.num.shl((-self.exp) as u32))
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

/// Serialized as `{"num": "<decimal>", "exp": e}`.
#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    num: String,
    exp: i32,
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DyadicRepr { num: self.num.to_string(), exp: self.exp }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = DyadicRepr::deserialize(d)?;
        let num: Int = r.num.parse().map_err(serde::de::Error::custom)?;
        Ok(DyadicRational::new(num, r.exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let x = DyadicRational::new(12i64, 3);
        assert_eq!(x.num(), &Int::from(3i64));
        assert_eq!(x.exp(), 1);
        let z = DyadicRational::new(0i64, 9);
        assert_eq!(z, DyadicRational::zero());
        assert_eq!(z.exp(), 0);
    }

    #[test]
    fn arithmetic_and_order() {
        let half = DyadicRational::pow2(-1);
        let quarter = DyadicRational::pow2(-2);
        assert_eq!(&half + &quarter, DyadicRational::new(3i64, 2));
        assert_eq!(&half * &half, quarter);
        assert_eq!(&quarter - &half, DyadicRational::new(-1i64, 2));
        assert!(quarter < half);
        assert!(-&half < quarter);
        assert_eq!(DyadicRational::new(7i64, 1).floor_div_pow2(0), Int::from(3i64));
        assert_eq!(DyadicRational::new(-7i64, 1).floor_div_pow2(1), Int::from(-2i64));
        assert_eq!(DyadicRational::integer(5).floor_div_pow2(-2), Int::from(20i64));
    }

    #[test]
    fn serde_round_trip() {
        let x = DyadicRational::new(-45i64, 7);
        let s = serde_json::to_string(&x).unwrap();
        let y: DyadicRational = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }
}
