//! Finite unions of fine cells, the dyadic maximal function, and
//! exceptional sets built from its superlevel sets.

use super::grid::{cell_range, cells_for};
use super::interval::DyadicInterval;
use super::step::{check_in_grid, StepFunction};
use crate::error::{Error, Result};
use crate::num::{DyadicRational, QuadAccumulator, QuadExt};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    m: u32,
    cells: Vec<bool>,
}

impl Region {
    pub fn empty(m: u32) -> Self {
        Region { m, cells: vec![false; cells_for(m)] }
    }

    pub fn full(m: u32) -> Self {
        Region { m, cells: vec![true; cells_for(m)] }
    }

    pub fn from_cells(m: u32, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != cells_for(m) {
            return Err(Error::InvalidParameter(format!(
                "region needs {} cells, got {}",
                cells_for(m),
                cells.len()
            )));
        }
        Ok(Region { m, cells })
    }

    pub fn from_intervals(m: u32, intervals: &[DyadicInterval]) -> Result<Self> {
        let mut r = Region::empty(m);
        for i in intervals {
            check_in_grid(m, i)?;
            for c in cell_range(m, i) {
                r.cells[c] = true;
            }
        }
        Ok(r)
    }

    /// Support of a step function.
    pub fn support(f: &StepFunction) -> Self {
        Region { m: f.m(), cells: f.values().iter().map(|v| !v.is_zero()).collect() }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn contains_cell(&self, c: usize) -> bool {
        self.cells[c]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }

    pub fn measure(&self) -> DyadicRational {
        DyadicRational::new(self.count() as i64, self.m as i32)
    }

    /// `|self ∩ I|`.
    pub fn measure_in(&self, i: &DyadicInterval) -> DyadicRational {
        let n = self.cells[cell_range(self.m, i)].iter().filter(|&&b| b).count();
        DyadicRational::new(n as i64, self.m as i32)
    }

    /// `I ⊆ self`.
    pub fn covers(&self, i: &DyadicInterval) -> bool {
        self.cells[cell_range(self.m, i)].iter().all(|&b| b)
    }

    pub fn union(&self, other: &Region) -> Region {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Region) -> Region {
        self.zip(other, |a, b| a && !b)
    }

    fn zip(&self, other: &Region, f: impl Fn(bool, bool) -> bool) -> Region {
        assert_eq!(self.m, other.m, "region grid mismatch");
        Region {
            m: self.m,
            cells: self.cells.iter().zip(&other.cells).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn indicator(&self) -> StepFunction {
        StepFunction::from_fn(self.m, |c| if self.cells[c] { QuadExt::one() } else { QuadExt::zero() })
    }
}

/// `M f(x) = max_{x ∈ I ⊆ [0, 2^M)} |I|^{-1} ∫_I |f|` over dyadic `I`.
pub fn dyadic_maximal(f: &StepFunction) -> StepFunction {
    let m = f.m();
    let levels = 2 * m as usize;
    // sums[L][j] = Σ |f| over the j-th block of 2^L fine cells.
    let mut sums: Vec<Vec<QuadExt>> = vec![f.values().iter().map(QuadExt::abs).collect()];
    for _ in 0..levels {
        let prev = sums.last().unwrap();
        let next = prev.chunks(2).map(|p| &p[0] + &p[1]).collect();
        sums.push(next);
    }
    // best[j] at level L = max over ancestors at levels >= L.
    let mut best = vec![sums[levels][0].scale_pow2(-(levels as i32))];
    for l in (0..levels).rev() {
        best = sums[l]
            .iter()
            .enumerate()
            .map(|(j, s)| s.scale_pow2(-(l as i32)).max(best[j / 2].clone()))
            .collect();
    }
    StepFunction::from_values(m, best).expect("size preserved")
}

/// `⋃_j { M χ_{E_j} > C |E_j| }`.
pub fn exceptional_set(sets: &[Region], c: &DyadicRational) -> Result<Region> {
    let Some(first) = sets.first() else {
        return Err(Error::InvalidParameter("no sets given".into()));
    };
    let m = first.m;
    let mut omega = Region::empty(m);
    for e in sets {
        if e.m != m {
            return Err(Error::GridMismatch { left: m, right: e.m });
        }
        let threshold = QuadExt::from_dyadic(&(c * &e.measure()));
        let maximal = dyadic_maximal(&e.indicator());
        for (cell, v) in maximal.values().iter().enumerate() {
            if *v > threshold {
                omega.cells[cell] = true;
            }
        }
    }
    Ok(omega)
}

/// `E \ Ω`, checked to keep at least half of `E`.
pub fn major_subset(e: &Region, omega: &Region) -> Result<Region> {
    let kept = e.difference(omega);
    if 2 * kept.count() < e.count() {
        return Err(Error::MajorSubset {
            kept: kept.measure().to_f64(),
            total: e.measure().to_f64(),
        });
    }
    Ok(kept)
}

/// Exceptional set together with major subsets of every listed set.
#[derive(Clone, Debug)]
pub struct ExceptionalSet {
    pub omega: Region,
    pub constant: DyadicRational,
    pub majors: Vec<Region>,
}

/// Starts from `C = 4` and doubles until every `E_j \ Ω` is a major subset of
/// `E_j` for each `j` in `major_of`.
pub fn exceptional_set_auto(sets: &[Region], major_of: &[usize]) -> Result<ExceptionalSet> {
    let mut c = DyadicRational::integer(4);
    for _ in 0..64 {
        let omega = exceptional_set(sets, &c)?;
        let majors: Result<Vec<Region>> = major_of.iter().map(|&j| major_subset(&sets[j], &omega)).collect();
        if let Ok(majors) = majors {
            return Ok(ExceptionalSet { omega, constant: c, majors });
        }
        c = c.scale_pow2(1);
    }
    Err(Error::Precondition("no constant C produced major subsets".into()))
}

/// Integer average helper used by tests: exact `|I|^{-1} ∫_I |f|`.
pub fn average_abs(f: &StepFunction, i: &DyadicInterval) -> QuadExt {
    let r = cell_range(f.m(), i);
    let len = r.len();
    let mut acc = QuadAccumulator::default();
    for v in &f.values()[r] {
        acc.add(&v.abs());
    }
    acc.finish().scale_pow2(-(len.trailing_zeros() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(k: i32, n: i64) -> DyadicInterval {
        DyadicInterval::new(k, n)
    }

    #[test]
    fn maximal_of_indicator() {
        let f = StepFunction::indicator(2, &iv(0, 0)).unwrap();
        let mf = dyadic_maximal(&f);
        for c in 0..4 {
            assert_eq!(mf.value(c), &QuadExt::one());
        }
        let g = StepFunction::indicator(1, &iv(-1, 0)).unwrap();
        let mg = dyadic_maximal(&g);
        assert_eq!(mg.eval(&DyadicRational::new(3i64, 2)), QuadExt::pow2(-1));
        assert!(dyadic_maximal(&StepFunction::zero(2)).is_zero());
    }

    #[test]
    fn exceptional_sets() {
        let e = Region::from_intervals(2, &[iv(0, 0)]).unwrap();
        let omega = exceptional_set(std::slice::from_ref(&e), &DyadicRational::integer(2)).unwrap();
        assert!(omega.is_empty());
        assert_eq!(major_subset(&e, &omega).unwrap(), e);
        let empty = Region::empty(2);
        assert!(exceptional_set(&[empty], &DyadicRational::integer(4)).unwrap().is_empty());
    }

    #[test]
    fn exceptional_set_half_constant() {
        // E = [0,1/2) on M = 1, C = 1/2: threshold 1/4. Averages of χ_E:
        // [0,1/2) → 1, [1/2,1) → 0, [0,1) → 1/2, [1,2) → 0, [0,2) → 1/4.
        let e = Region::from_intervals(1, &[iv(-1, 0)]).unwrap();
        let omega = exceptional_set(&[e], &DyadicRational::new(1i64, 1)).unwrap();
        assert_eq!(omega.cells(), &[true, true, false, false]);
    }

    #[test]
    fn major_subset_failure() {
        let e = Region::from_intervals(1, &[iv(-1, 0)]).unwrap();
        let omega = Region::full(1);
        assert!(matches!(major_subset(&e, &omega), Err(Error::MajorSubset { .. })));
    }
}
