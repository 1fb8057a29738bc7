//! Piecewise-constant functions on dyadic cells.
//!
//! Internally a function is stored densely on the fine mesh of its grid, so
//! pointwise operations never need a common refinement and equality of
//! functions is equality of vectors. [`StepFunction::cells`] recovers the
//! canonical sparse form: the coarsest dyadic partition on which the function
//! is constant, zero cells omitted.

use serde::{Deserialize, Serialize};

use super::grid::{cell_range, cells_for, MAX_M};
use super::interval::DyadicInterval;
use crate::error::{Error, Result};
use crate::num::{DyadicRational, QuadAccumulator, QuadExt, QuadRepr};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepFunction {
    m: u32,
    values: Vec<QuadExt>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Multiply,
}

/// Exponent argument for [`StepFunction::lp_norm`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

/// Smallest finite exponent accepted by `lp_norm`.
pub const MIN_EXPONENT: f64 = 0.25;

impl StepFunction {
    pub fn zero(m: u32) -> Self {
        assert!(m <= MAX_M);
        StepFunction { m, values: vec![QuadExt::zero(); cells_for(m)] }
    }

    pub fn from_values(m: u32, values: Vec<QuadExt>) -> Result<Self> {
        if m > MAX_M || values.len() != cells_for(m) {
            return Err(Error::InvalidParameter(format!(
                "expected {} values for M = {m}, got {}",
                cells_for(m.min(MAX_M)),
                values.len()
            )));
        }
        Ok(StepFunction { m, values })
    }

    pub fn from_fn(m: u32, mut f: impl FnMut(usize) -> QuadExt) -> Self {
        StepFunction { m, values: (0..cells_for(m)).map(&mut f).collect() }
    }

    /// Builds a function from disjoint cells; uncovered points are zero.
    pub fn from_cells(m: u32, cells: &[(DyadicInterval, QuadExt)]) -> Result<Self> {
        let mut f = StepFunction::zero(m);
        let mut covered = vec![false; f.values.len()];
        for (i, v) in cells {
            check_in_grid(m, i)?;
            for c in cell_range(m, i) {
                if covered[c] {
                    return Err(Error::Overlap(format!("cell {i} overlaps an earlier cell")));
                }
                covered[c] = true;
                f.values[c] = v.clone();
            }
        }
        Ok(f)
    }

    pub fn indicator(m: u32, i: &DyadicInterval) -> Result<Self> {
        StepFunction::from_cells(m, &[(*i, QuadExt::one())])
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn values(&self) -> &[QuadExt] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> &QuadExt {
        &self.values[cell]
    }

    /// Value at a point of `[0, 2^M)`; zero outside the domain.
    pub fn eval(&self, x: &DyadicRational) -> QuadExt {
        let c = x.floor_div_pow2(-(self.m as i32));
        match c.to_i64() {
            Some(c) if c >= 0 && (c as usize) < self.values.len() => self.values[c as usize].clone(),
            _ => QuadExt::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(QuadExt::is_zero)
    }

    /// Canonical cells: coarsest dyadic blocks of constant value, zeros dropped,
    /// ordered by position.
    pub fn cells(&self) -> Vec<(DyadicInterval, QuadExt)> {
        let mut out = Vec::new();
        self.collect_cells(DyadicInterval::new(self.m as i32, 0), &mut out);
        out
    }

    fn collect_cells(&self, i: DyadicInterval, out: &mut Vec<(DyadicInterval, QuadExt)>) {
        let r = cell_range(self.m, &i);
        let first = &self.values[r.start];
        if self.values[r.clone()].iter().all(|v| v == first) {
            if !first.is_zero() {
                out.push((i, first.clone()));
            }
            return;
        }
        for child in i.children() {
            self.collect_cells(child, out);
        }
    }

    fn check_grid(&self, other: &StepFunction) -> Result<()> {
        if self.m != other.m {
            return Err(Error::GridMismatch { left: self.m, right: other.m });
        }
        Ok(())
    }

    pub fn combine(&self, other: &StepFunction, op: CombineOp) -> Result<StepFunction> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| match op {
                CombineOp::Add => a + b,
                CombineOp::Multiply => a * b,
            })
            .collect();
        Ok(StepFunction { m: self.m, values })
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.combine(other, CombineOp::Add)
    }

    pub fn sub(&self, other: &StepFunction) -> Result<StepFunction> {
        self.add(&other.scale(&QuadExt::integer(-1)))
    }

    pub fn mul(&self, other: &StepFunction) -> Result<StepFunction> {
        self.combine(other, CombineOp::Multiply)
    }

    pub fn scale(&self, c: &QuadExt) -> StepFunction {
        StepFunction { m: self.m, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn abs(&self) -> StepFunction {
        StepFunction { m: self.m, values: self.values.iter().map(QuadExt::abs).collect() }
    }

    /// Restriction to a spatial interval (zero elsewhere).
    pub fn restrict(&self, i: &DyadicInterval) -> Result<StepFunction> {
        check_in_grid(self.m, i)?;
        let r = cell_range(self.m, i);
        Ok(StepFunction::from_fn(self.m, |c| {
            if r.contains(&c) {
                self.values[c].clone()
            } else {
                QuadExt::zero()
            }
        }))
    }

    /// `∫_I f`, or over the whole domain when `i` is `None`.
    pub fn integrate(&self, i: Option<&DyadicInterval>) -> Result<QuadExt> {
        let r = match i {
            Some(i) => {
                check_in_grid(self.m, i)?;
                cell_range(self.m, i)
            }
            None => 0..self.values.len(),
        };
        let mut acc = QuadAccumulator::default();
        for v in &self.values[r] {
            acc.add(v);
        }
        Ok(acc.finish().scale_pow2(-(self.m as i32)))
    }

    /// `∫ f g`.
    pub fn inner_product(&self, other: &StepFunction) -> Result<QuadExt> {
        self.check_grid(other)?;
        let mut acc = QuadAccumulator::default();
        for (a, b) in self.values.iter().zip(&other.values) {
            if !a.is_zero() && !b.is_zero() {
                acc.add(&(a * b));
            }
        }
        Ok(acc.finish().scale_pow2(-(self.m as i32)))
    }

    /// `∫ |f|`, exact.
    pub fn l1_exact(&self) -> QuadExt {
        let mut acc = QuadAccumulator::default();
        for v in &self.values {
            acc.add(&v.abs());
        }
        acc.finish().scale_pow2(-(self.m as i32))
    }

    /// `∫ f²`, exact.
    pub fn l2_squared_exact(&self) -> QuadExt {
        let mut acc = QuadAccumulator::default();
        for v in &self.values {
            if !v.is_zero() {
                acc.add(&v.square());
            }
        }
        acc.finish().scale_pow2(-(self.m as i32))
    }

    /// `max |f|`, exact.
    pub fn sup_exact(&self) -> QuadExt {
        self.values.iter().map(QuadExt::abs).max().unwrap_or_default()
    }

    pub fn lp_norm(&self, p: Exponent) -> Result<f64> {
        match p {
            Exponent::Infinity => Ok(self.sup_exact().to_f64()),
            Exponent::Finite(p) if !p.is_finite() || p < MIN_EXPONENT => {
                Err(Error::InvalidParameter(format!("exponent p = {p} below {MIN_EXPONENT}")))
            }
            Exponent::Finite(1.0) => Ok(self.l1_exact().to_f64()),
            Exponent::Finite(2.0) => Ok(self.l2_squared_exact().to_f64().sqrt()),
            Exponent::Finite(p) => {
                let cell = 2f64.powi(-(self.m as i32));
                let s: f64 = self.values.iter().map(|v| v.to_f64().abs().powf(p) * cell).sum();
                Ok(s.powf(1.0 / p))
            }
        }
    }

    /// `sup_λ λ·|{|f| > λ}|` evaluated exactly over the attained levels.
    pub fn weak_l1_exact(&self) -> QuadExt {
        let mut levels: Vec<QuadExt> = self.values.iter().map(QuadExt::abs).collect();
        levels.sort();
        let n = levels.len();
        let mut best = QuadExt::zero();
        // Letting λ increase to the level v, the superlevel set is {|f| >= v}.
        let mut i = 0;
        while i < n {
            let v = levels[i].clone();
            if !v.is_zero() {
                let count = (n - i) as i64;
                let cand = (&v * &QuadExt::integer(count)).scale_pow2(-(self.m as i32));
                best = best.max(cand);
            }
            while i < n && levels[i] == v {
                i += 1;
            }
        }
        best
    }

    pub fn weak_l1_norm(&self) -> f64 {
        self.weak_l1_exact().to_f64()
    }
}

pub(crate) fn check_in_grid(m: u32, i: &DyadicInterval) -> Result<()> {
    let domain = DyadicInterval::new(m as i32, 0);
    if i.scale < -(m as i32) || !i.subset_of(&domain) {
        return Err(Error::OutOfGrid { what: format!("interval {i}"), m });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CellRepr {
    k: i32,
    n: i64,
    #[serde(flatten)]
    value: QuadRepr,
}

#[derive(Serialize, Deserialize)]
struct StepRepr {
    #[serde(rename = "M")]
    m: u32,
    cells: Vec<CellRepr>,
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells = self
            .cells()
            .iter()
            .map(|(i, v)| CellRepr { k: i.scale, n: i.index, value: QuadRepr::from(v) })
            .collect();
        StepRepr { m: self.m, cells }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = StepRepr::deserialize(d)?;
        if r.m > MAX_M {
            return Err(D::Error::custom(format!("M = {} exceeds {MAX_M}", r.m)));
        }
        let mut cells = Vec::with_capacity(r.cells.len());
        for c in r.cells {
            let v = QuadExt::try_from(c.value).map_err(D::Error::custom)?;
            cells.push((DyadicInterval::new(c.k, c.n), v));
        }
        StepFunction::from_cells(r.m, &cells).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(k: i32, n: i64) -> DyadicInterval {
        DyadicInterval::new(k, n)
    }

    #[test]
    fn indicator_product() {
        let a = StepFunction::indicator(2, &iv(0, 0)).unwrap();
        let b = StepFunction::indicator(2, &iv(-1, 1)).unwrap();
        assert_eq!(a.mul(&b).unwrap(), b);
        assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn sqrt2_cells_square_to_two() {
        let f = StepFunction::from_cells(2, &[(iv(-2, 0), QuadExt::sqrt2())]).unwrap();
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.cells(), vec![(iv(-2, 0), QuadExt::integer(2))]);
    }

    #[test]
    fn integrals() {
        let f = StepFunction::indicator(2, &iv(0, 0)).unwrap();
        assert_eq!(f.integrate(None).unwrap(), QuadExt::one());
        let g = StepFunction::from_cells(2, &[(iv(-1, 0), QuadExt::sqrt2())]).unwrap();
        assert_eq!(g.integrate(None).unwrap(), QuadExt::new(0i64, 1i64, 1));
        let w1 = StepFunction::from_cells(
            2,
            &[(iv(-1, 0), QuadExt::one()), (iv(-1, 1), QuadExt::integer(-1))],
        )
        .unwrap();
        assert!(f.inner_product(&w1).unwrap().is_zero());
    }

    #[test]
    fn norms() {
        let f = StepFunction::indicator(3, &iv(0, 0)).unwrap();
        for p in [0.5, 1.0, 2.0, 3.5] {
            assert!((f.lp_norm(Exponent::Finite(p)).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(f.lp_norm(Exponent::Infinity).unwrap(), 1.0);
        assert!(f.lp_norm(Exponent::Finite(0.0)).is_err());
        let g = StepFunction::from_cells(
            2,
            &[(iv(-2, 0), QuadExt::integer(2)), (iv(-2, 1), QuadExt::one()), (iv(-1, 1), QuadExt::one())],
        )
        .unwrap();
        assert_eq!(g.weak_l1_exact(), QuadExt::one());
    }

    #[test]
    fn canonical_cells_merge() {
        let f = StepFunction::from_cells(
            2,
            &[(iv(-2, 0), QuadExt::one()), (iv(-2, 1), QuadExt::one()), (iv(-1, 1), QuadExt::integer(3))],
        )
        .unwrap();
        assert_eq!(
            f.cells(),
            vec![(iv(-1, 0), QuadExt::one()), (iv(-1, 1), QuadExt::integer(3))]
        );
    }

    #[test]
    fn rejects_overlap_and_out_of_grid() {
        assert!(StepFunction::from_cells(1, &[(iv(0, 0), QuadExt::one()), (iv(-1, 1), QuadExt::one())]).is_err());
        assert!(StepFunction::indicator(1, &iv(1, 1)).is_err());
        assert!(StepFunction::indicator(1, &iv(-2, 0)).is_err());
        let a = StepFunction::zero(1);
        let b = StepFunction::zero(2);
        assert_eq!(a.add(&b), Err(Error::GridMismatch { left: 1, right: 2 }));
    }

    #[test]
    fn json_round_trip() {
        let f = StepFunction::from_cells(
            2,
            &[(iv(-2, 3), QuadExt::new(1i64, -3i64, 2)), (iv(1, 1), QuadExt::integer(5))],
        )
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        assert!(s.starts_with(r#"{"M":2,"cells":[{"k":-2,"n":3,"a":"1","b":"-3","m":2}"#));
    }
}
