//! Exact numbers `(a + b√2) / 2^m` in the ring `Z[√2][1/2]`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::dyadic::DyadicRational;
use super::int::Int;

/// `(a + b√2) / 2^m`.
///
/// Canonical form: `a` and `b` are not both even (an element of `Z[√2]` is
/// divisible by 2 exactly when both coordinates are), and zero is `(0, 0, 0)`.
/// The exponent may be negative. Structural equality is numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QuadExt {
    a: Int,
    b: Int,
    m: i32,
}

fn min_tz(a: &Int, b: &Int) -> Option<u32> {
    match (a.trailing_zeros(), b.trailing_zeros()) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x),
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl QuadExt {
    pub fn new(a: impl Into<Int>, b: impl Into<Int>, m: i32) -> Self {
        let (a, b) = (a.into(), b.into());
        match min_tz(&a, &b) {
            None => QuadExt::zero(),
            Some(0) => QuadExt { a, b, m },
            Some(t) => QuadExt {
                a: a.shr_floor(t),
                b: b.shr_floor(t),
                m: m - t as i32,
            },
        }
    }

    pub fn zero() -> Self {
        QuadExt { a: Int::ZERO, b: Int::ZERO, m: 0 }
    }

    pub fn one() -> Self {
        QuadExt { a: Int::ONE, b: Int::ZERO, m: 0 }
    }

    pub fn integer(v: i64) -> Self {
        QuadExt::new(v, 0i64, 0)
    }

    pub fn sqrt2() -> Self {
        QuadExt { a: Int::ZERO, b: Int::ONE, m: 0 }
    }

    /// `2^e`.
    pub fn pow2(e: i32) -> Self {
        QuadExt { a: Int::ONE, b: Int::ZERO, m: -e }
    }

    /// `2^{k/2}` for any integer `k`.
    pub fn sqrt2_pow(k: i32) -> Self {
        if k.rem_euclid(2) == 0 {
            QuadExt::pow2(k.div_euclid(2))
        } else {
            QuadExt { a: Int::ZERO, b: Int::ONE, m: -(k - 1).div_euclid(2) }
        }
    }

    pub fn from_dyadic(d: &DyadicRational) -> Self {
        QuadExt::new(d.num().clone(), 0i64, d.exp())
    }

    pub fn a(&self) -> &Int {
        &self.a
    }

    pub fn b(&self) -> &Int {
        &self.b
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the value is rational (no √2 part).
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Rational part as a dyadic, if the value is rational.
    pub fn to_dyadic(&self) -> Option<DyadicRational> {
        self.is_rational().then(|| DyadicRational::new(self.a.clone(), self.m))
    }

    /// Exact sign in {-1, 0, 1}.
    pub fn signum(&self) -> i32 {
        let (sa, sb) = (self.a.signum(), self.b.signum());
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        let a2 = &self.a * &self.a;
        let b2 = (&self.b * &self.b).shl(1);
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            _ => sb,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// `self * 2^e`.
    pub fn scale_pow2(&self, e: i32) -> Self {
        if self.is_zero() {
            return QuadExt::zero();
        }
        QuadExt { a: self.a.clone(), b: self.b.clone(), m: self.m - e }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64_scaled(-self.m);
        let b = self.b.to_f64_scaled(-self.m);
        a + b * std::f64::consts::SQRT_2
    }

    /// Coordinates `(a, b)` over the common denominator `2^e`, `e >= self.m`.
    fn aligned(&self, e: i32) -> (Int, Int) {
        let s = (e - self.m) as u32;
        (self.a.shl(s), self.b.shl(s))
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.m.max(rhs.m);
        let (a1, b1) = self.aligned(e);
        let (a2, b2) = rhs.aligned(e);
        QuadExt::new(a1 + a2, b1 + b2, e)
    }
}

impl Sub<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        self + &(-rhs)
    }
}

impl Mul<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        if self.is_zero() || rhs.is_zero() {
            return QuadExt::zero();
        }
        let a = &self.a * &rhs.a + (&self.b * &rhs.b).shl(1);
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        QuadExt::new(a, b, self.m + rhs.m)
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -&self.a, b: -&self.b, m: self.m }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                (&self).$method(rhs)
            }
        }
        impl $tr<QuadExt> for &QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -&self
    }
}

impl AddAssign<&QuadExt> for QuadExt {
    fn add_assign(&mut self, rhs: &QuadExt) {
        *self = &*self + rhs;
    }
}

impl AddAssign<QuadExt> for QuadExt {
    fn add_assign(&mut self, rhs: QuadExt) {
        *self = &*self + &rhs;
    }
}

impl Sum for QuadExt {
    fn sum<I: Iterator<Item = QuadExt>>(iter: I) -> QuadExt {
        let mut acc = QuadAccumulator::default();
        for x in iter {
            acc.add(&x);
        }
        acc.finish()
    }
}

impl<'a> Sum<&'a QuadExt> for QuadExt {
    fn sum<I: Iterator<Item = &'a QuadExt>>(iter: I) -> QuadExt {
        let mut acc = QuadAccumulator::default();
        for x in iter {
            acc.add(x);
        }
        acc.finish()
    }
}

/// Running sum that skips canonicalization until `finish`.
#[derive(Clone, Debug, Default)]
pub struct QuadAccumulator {
    a: Int,
    b: Int,
    m: i32,
    started: bool,
}

impl QuadAccumulator {
    pub fn add(&mut self, x: &QuadExt) {
        if x.is_zero() {
            return;
        }
        if !self.started {
            self.a = x.a.clone();
            self.b = x.b.clone();
            self.m = x.m;
            self.started = true;
            return;
        }
        if x.m > self.m {
            let s = (x.m - self.m) as u32;
            self.a = self.a.shl(s);
            self.b = self.b.shl(s);
            self.m = x.m;
        }
        let (xa, xb) = x.aligned(self.m);
        self.a = &self.a + &xa;
        self.b = &self.b + &xb;
    }

    pub fn finish(self) -> QuadExt {
        QuadExt::new(self.a, self.b, self.m)
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let body = match (self.a.is_zero(), self.b.is_zero()) {
            (false, true) => format!("{}", self.a),
            (true, false) => format!("{}√2", self.b),
            _ => {
                if self.b.signum() < 0 {
                    format!("({} - {}√2)", self.a, self.b.abs())
                } else {
                    format!("({} + {}√2)", self.a, self.b)
                }
            }
        };
        match self.m.cmp(&0) {
            Ordering::Equal => write!(f, "{body}"),
            Ordering::Greater => write!(f, "{body}/2^{}", self.m),
            Ordering::Less => write!(f, "{body}*2^{}", -self.m),
        }
    }
}

/// JSON form `{"a": "<decimal>", "b": "<decimal>", "m": m}`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct QuadRepr {
    pub a: String,
    pub b: String,
    pub m: i32,
}

impl From<&QuadExt> for QuadRepr {
    fn from(q: &QuadExt) -> Self {
        QuadRepr { a: q.a.to_string(), b: q.b.to_string(), m: q.m }
    }
}

impl TryFrom<QuadRepr> for QuadExt {
    type Error = String;
    fn try_from(r: QuadRepr) -> Result<Self, String> {
        let a: Int = r.a.parse().map_err(|e| format!("bad integer {:?}: {e}", r.a))?;
        let b: Int = r.b.parse().map_err(|e| format!("bad integer {:?}: {e}", r.b))?;
        Ok(QuadExt::new(a, b, r.m))
    }
}

impl Serialize for QuadExt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QuadRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadExt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        QuadExt::try_from(QuadRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
