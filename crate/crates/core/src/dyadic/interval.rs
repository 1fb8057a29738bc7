use std::fmt;

use serde::{Deserialize, Serialize};

use crate::num::DyadicRational;

/// The half-open interval `[n·2^k, (n+1)·2^k)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub scale: i32,
    pub index: i64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntervalRelation {
    Equal,
    /// First interval strictly inside the second.
    AInsideB,
    BInsideA,
    Disjoint,
}

impl DyadicInterval {
    pub const fn new(scale: i32, index: i64) -> Self {
        DyadicInterval { scale, index }
    }

    pub fn length(&self) -> DyadicRational {
        DyadicRational::pow2(self.scale)
    }

    pub fn start(&self) -> DyadicRational {
        DyadicRational::new(self.index, -self.scale)
    }

    pub fn end(&self) -> DyadicRational {
        DyadicRational::new(self.index + 1, -self.scale)
    }

    /// Midpoint `(n + 1/2)·2^k`.
    pub fn center(&self) -> DyadicRational {
        DyadicRational::new(2 * self.index + 1, 1 - self.scale)
    }

    pub fn parent(&self) -> Self {
        DyadicInterval::new(self.scale + 1, self.index >> 1)
    }

    pub fn children(&self) -> [Self; 2] {
        [
            DyadicInterval::new(self.scale - 1, 2 * self.index),
            DyadicInterval::new(self.scale - 1, 2 * self.index + 1),
        ]
    }

    /// The unique dyadic interval of scale `s >= self.scale` containing `self`.
    pub fn ancestor(&self, s: i32) -> Self {
        debug_assert!(s >= self.scale);
        DyadicInterval::new(s, self.index >> (s - self.scale))
    }

    /// `self ⊆ other`.
    pub fn subset_of(&self, other: &Self) -> bool {
        self.scale <= other.scale && self.index >> (other.scale - self.scale) == other.index
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.subset_of(other) || other.subset_of(self)
    }

    pub fn relation(&self, other: &Self) -> IntervalRelation {
        if self == other {
            IntervalRelation::Equal
        } else if self.subset_of(other) {
            IntervalRelation::AInsideB
        } else if other.subset_of(self) {
            IntervalRelation::BInsideA
        } else {
            IntervalRelation::Disjoint
        }
    }

    pub fn contains_point(&self, x: &DyadicRational) -> bool {
        x.floor_div_pow2(self.scale) == crate::num::Int::from(self.index)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start(), self.end())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        let unit = DyadicInterval::new(0, 0);
        let left = DyadicInterval::new(-1, 0);
        let right = DyadicInterval::new(-1, 1);
        assert_eq!(unit.relation(&unit), IntervalRelation::Equal);
        assert_eq!(left.relation(&unit), IntervalRelation::AInsideB);
        assert_eq!(unit.relation(&left), IntervalRelation::BInsideA);
        assert_eq!(left.relation(&right), IntervalRelation::Disjoint);
    }

    #[test]
    fn geometry() {
        let i = DyadicInterval::new(-2, 3);
        assert_eq!(i.start(), DyadicRational::new(3i64, 2));
        assert_eq!(i.end(), DyadicRational::integer(1));
        assert_eq!(i.center(), DyadicRational::new(7i64, 3));
        assert_eq!(i.parent(), DyadicInterval::new(-1, 1));
        assert_eq!(i.ancestor(0), DyadicInterval::new(0, 0));
        assert!(i.contains_point(&DyadicRational::new(3i64, 2)));
        assert!(!i.contains_point(&DyadicRational::integer(1)));
        assert_eq!(i.to_string(), "[3/2^2, 1)");
    }
}
