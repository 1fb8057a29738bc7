//! The linearizing choice function `x ↦ N(x)`.

use serde::{Deserialize, Serialize};

use super::grid::cells_for;
use super::interval::DyadicInterval;
use super::step::StepFunction;
use crate::error::{Error, Result};
use crate::num::{DyadicRational, QuadExt};

/// A step function with values in `[0, 2^M)`, constant on fine cells.
///
/// Membership `N(x) ∈ ω` is answered from a precomputed table of
/// `floor(N(x) / 2^s)` for every frequency scale `s ∈ [-M, M]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceFunction {
    m: u32,
    values: Vec<DyadicRational>,
    floors: Vec<i64>,
}

impl ChoiceFunction {
    pub fn new(m: u32, values: Vec<DyadicRational>) -> Result<Self> {
        if values.len() != cells_for(m) {
            return Err(Error::InvalidParameter(format!(
                "choice function needs {} values, got {}",
                cells_for(m),
                values.len()
            )));
        }
        let top = DyadicRational::pow2(m as i32);
        let scales = 2 * m as usize + 1;
        let mut floors = Vec::with_capacity(values.len() * scales);
        for v in &values {
            if v.signum() < 0 || *v >= top {
                return Err(Error::OutOfGrid { what: format!("N value {v}"), m });
            }
            for s in -(m as i32)..=(m as i32) {
                floors.push(v.floor_div_pow2(s).to_i64().expect("bounded by 2^M"));
            }
        }
        Ok(ChoiceFunction { m, values, floors })
    }

    pub fn constant(m: u32, v: DyadicRational) -> Result<Self> {
        ChoiceFunction::new(m, vec![v; cells_for(m)])
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn value(&self, cell: usize) -> &DyadicRational {
        &self.values[cell]
    }

    pub fn values(&self) -> &[DyadicRational] {
        &self.values
    }

    /// `N(x) ∈ ω` for `x` in the given fine cell.
    pub fn in_freq(&self, cell: usize, w: &DyadicInterval) -> bool {
        let m = self.m as i32;
        if w.scale < -m || w.scale > m {
            return w.contains_point(&self.values[cell]);
        }
        let stride = 2 * self.m as usize + 1;
        self.floors[cell * stride + (w.scale + m) as usize] == w.index
    }

    pub fn to_step(&self) -> StepFunction {
        StepFunction::from_fn(self.m, |c| QuadExt::from_dyadic(&self.values[c]))
    }

    pub fn from_step(f: &StepFunction) -> Result<Self> {
        let values = f
            .values()
            .iter()
            .map(|v| {
                v.to_dyadic()
                    .ok_or_else(|| Error::InvalidParameter(format!("N value {v} is irrational")))
            })
            .collect::<Result<Vec<_>>>()?;
        ChoiceFunction::new(f.m(), values)
    }
}

impl Serialize for ChoiceFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_step().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChoiceFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = StepFunction::deserialize(d)?;
        ChoiceFunction::from_step(&f).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_matches_direct_check() {
        let m = 2;
        let values: Vec<_> = (0..16).map(|c| DyadicRational::new(c as i64 * 3 % 16, 2)).collect();
        let n = ChoiceFunction::new(m, values.clone()).unwrap();
        for (c, v) in values.iter().enumerate() {
            for s in -3..=3 {
                for j in 0..8 {
                    let w = DyadicInterval::new(s, j);
                    assert_eq!(n.in_freq(c, &w), w.contains_point(v));
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ChoiceFunction::constant(1, DyadicRational::integer(2)).is_err());
        assert!(ChoiceFunction::constant(1, DyadicRational::integer(-1)).is_err());
        assert!(ChoiceFunction::constant(1, DyadicRational::new(3i64, 1)).is_ok());
    }
}
