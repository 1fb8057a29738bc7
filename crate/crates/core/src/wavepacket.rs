//! Walsh functions, wave packets, and coefficient extraction.
//!
//! `φ_P(x) = 2^{k/2} w_l(2^k x − n)` for the tile `P = (k, n, l)`. On the
//! fine mesh of an `M` grid the packet is `±2^{k/2}` on the `2^{M-k}` cells
//! of `I_P`; the sign pattern is the Paley-ordered Walsh function
//! `w_l(x) = (−1)^{Σ_i l_i x_{i+1}}`, with `l_i` the bits of `l` and `x_i`
//! the binary digits of `x`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use crate::dyadic::{cell_range, AmbientGrid, StepFunction};
use crate::error::{Error, Result};
use crate::num::{QuadAccumulator, QuadExt};
use crate::tiles::{Collection, Quartile, Rect, Tile};

/// Number of binary digits of `l` (zero for `l = 0`).
pub fn walsh_depth(l: u64) -> u32 {
    64 - l.leading_zeros()
}

/// Signs of `w_l` on its `2^{depth(l)}` equal cells of `[0, 1)`, computed
/// by the defining recursion `w_{2l} = w_l(2x) + w_l(2x−1)`,
/// `w_{2l+1} = w_l(2x) − w_l(2x−1)`.
pub fn walsh_signs_recursive(l: u64) -> Vec<i8> {
    if l == 0 {
        return vec![1];
    }
    let half = walsh_signs_recursive(l / 2);
    let mut out = half.clone();
    if l.is_multiple_of(2) {
        out.extend_from_slice(&half);
    } else {
        out.extend(half.iter().map(|s| -s));
    }
    out
}

/// Sign of `w_l` on the `t`-th of `2^d` equal cells of `[0, 1)`,
/// `d >= depth(l)`.
pub fn walsh_sign(l: u64, t: u64, d: u32) -> i8 {
    debug_assert!(walsh_depth(l) <= d);
    let rev = if d == 0 { 0 } else { t.reverse_bits() >> (64 - d) };
    if (l & rev).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `w_l` as a step function on an `M` grid, which must resolve its cells.
pub fn walsh_function(l: u64, m: u32) -> Result<StepFunction> {
    let d = walsh_depth(l);
    // [0,1) spans 2^M fine cells; each Walsh cell spans 2^{M-d} of them.
    if d > m {
        return Err(Error::InvalidParameter(format!("w_{l} needs a grid with M >= {d}")));
    }
    let signs = walsh_signs_recursive(l);
    let width = 1usize << (m - d);
    Ok(StepFunction::from_fn(m, |c| {
        if c < (1usize << m) {
            QuadExt::integer(signs[c / width] as i64)
        } else {
            QuadExt::zero()
        }
    }))
}

/// A wave packet sampled on the fine mesh of its grid.
#[derive(Clone, Debug)]
pub struct Packet {
    pub tile: Tile,
    /// First fine cell of `I_P`.
    pub start: usize,
    /// Sign on each fine cell of `I_P`.
    pub signs: Vec<i8>,
    /// `2^{k/2}`.
    pub amplitude: QuadExt,
    m: u32,
}

impl Packet {
    pub fn new(m: u32, tile: &Tile) -> Packet {
        let k = tile.k();
        let d = (m as i32 - k) as u32;
        let range = cell_range(m, &tile.interval());
        let l = tile.l() as u64;
        Packet {
            tile: *tile,
            start: range.start,
            signs: (0..range.len() as u64).map(|t| walsh_sign(l, t, d)).collect(),
            amplitude: QuadExt::sqrt2_pow(k),
            m,
        }
    }

    pub fn cells(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.signs.len()
    }

    /// `⟨f, φ_P⟩`.
    pub fn inner(&self, f: &StepFunction) -> QuadExt {
        debug_assert_eq!(f.m(), self.m);
        self.inner_values(f.values())
    }

    /// `⟨f, φ_P⟩` for `f` given by its fine-cell values.
    pub fn inner_values(&self, values: &[QuadExt]) -> QuadExt {
        self.inner_masked(values, |_| true)
    }

    /// `⟨f χ_mask, φ_P⟩`.
    pub fn inner_masked(&self, values: &[QuadExt], mask: impl Fn(usize) -> bool) -> QuadExt {
        let mut pos = QuadAccumulator::default();
        let mut neg = QuadAccumulator::default();
        for (c, &s) in self.cells().zip(&self.signs) {
            if !mask(c) {
                continue;
            }
            if s > 0 {
                pos.add(&values[c]);
            } else {
                neg.add(&values[c]);
            }
        }
        let signed = pos.finish() - neg.finish();
        (&signed * &self.amplitude).scale_pow2(-(self.m as i32))
    }

    /// `out += coef · φ_P · χ_mask` on fine cells.
    pub fn add_into(&self, out: &mut [QuadAccumulator], coef: &QuadExt, mask: impl Fn(usize) -> bool) {
        if coef.is_zero() {
            return;
        }
        let plus = coef * &self.amplitude;
        let minus = -&plus;
        for (c, &s) in self.cells().zip(&self.signs) {
            if mask(c) {
                out[c].add(if s > 0 { &plus } else { &minus });
            }
        }
    }

    pub fn value(&self, cell: usize) -> QuadExt {
        if self.cells().contains(&cell) {
            let s = self.signs[cell - self.start];
            if s > 0 {
                self.amplitude.clone()
            } else {
                -&self.amplitude
            }
        } else {
            QuadExt::zero()
        }
    }

    pub fn to_step(&self) -> StepFunction {
        StepFunction::from_fn(self.m, |c| self.value(c))
    }
}

/// Memo table of packets keyed by tile; safe under concurrent use.
#[derive(Debug)]
pub struct PacketCache {
    m: u32,
    table: RwLock<HashMap<Tile, Arc<Packet>>>,
}

impl PacketCache {
    pub fn new(m: u32) -> Self {
        PacketCache { m, table: RwLock::new(HashMap::new()) }
    }

    pub fn get(&self, tile: &Tile) -> Arc<Packet> {
        if let Some(p) = self.table.read().expect("packet cache poisoned").get(tile) {
            return p.clone();
        }
        let packet = Arc::new(Packet::new(self.m, tile));
        self.table
            .write()
            .expect("packet cache poisoned")
            .entry(*tile)
            .or_insert(packet)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.table.read().expect("packet cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `φ_P` as a step function.
pub fn wave_packet(grid: &AmbientGrid, tile: &Tile) -> Result<StepFunction> {
    if !tile.in_grid(grid) {
        return Err(Error::OutOfGrid { what: format!("tile {tile}"), m: grid.m() });
    }
    Ok(grid.packets().get(tile).to_step())
}

/// `⟨φ_P, φ_{P'}⟩`, computed on the smaller of the two spatial intervals.
pub fn packet_inner(grid: &AmbientGrid, p: &Tile, q: &Tile) -> QuadExt {
    let (ip, iq) = (p.interval(), q.interval());
    if !ip.intersects(&iq) || !p.freq().intersects(&q.freq()) {
        return QuadExt::zero();
    }
    let (a, b) = (grid.packets().get(p), grid.packets().get(q));
    let (small, big) = if a.signs.len() <= b.signs.len() { (&a, &b) } else { (&b, &a) };
    let mut total: i64 = 0;
    for (c, &s) in small.cells().zip(&small.signs) {
        total += (s * big.signs[c - big.start]) as i64;
    }
    (&QuadExt::integer(total) * &(&a.amplitude * &b.amplitude)).scale_pow2(-(grid.m() as i32))
}

/// Coefficients `a_{(P, j)} = ⟨f, φ_{P_j}⟩`; missing keys are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoefficientSequence {
    entries: BTreeMap<(Quartile, usize), QuadExt>,
}

impl CoefficientSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, p: &Quartile, j: usize) -> QuadExt {
        self.entries.get(&(*p, j)).cloned().unwrap_or_default()
    }

    pub fn insert(&mut self, p: Quartile, j: usize, v: QuadExt) {
        if v.is_zero() {
            self.entries.remove(&(p, j));
        } else {
            self.entries.insert((p, j), v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Quartile, usize), &QuadExt)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keeps only entries for the listed quartiles.
    pub fn restrict(&self, keep: &[Quartile]) -> CoefficientSequence {
        CoefficientSequence {
            entries: self
                .entries
                .iter()
                .filter(|((p, _), _)| keep.contains(p))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }
}

/// `⟨f, φ_{P_j}⟩` for every member `P` and every `j` in `which`.
pub fn analyze(f: &StepFunction, coll: &Collection<Quartile>, which: &[usize]) -> Result<CoefficientSequence> {
    let grid = coll.grid();
    if f.m() != grid.m() {
        return Err(Error::GridMismatch { left: f.m(), right: grid.m() });
    }
    let mut seq = CoefficientSequence::new();
    for p in coll {
        for &j in which {
            let packet = grid.packets().get(&p.subtile(j));
            seq.insert(*p, j, packet.inner(f));
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicInterval;

    #[test]
    fn walsh_small_cases() {
        assert_eq!(walsh_signs_recursive(0), vec![1]);
        assert_eq!(walsh_signs_recursive(1), vec![1, -1]);
        assert_eq!(walsh_signs_recursive(3), vec![1, -1, -1, 1]);
        assert_eq!(walsh_signs_recursive(2), vec![1, -1, 1, -1]);
    }

    #[test]
    fn closed_form_matches_recursion() {
        for l in 0..256u64 {
            let rec = walsh_signs_recursive(l);
            let d = walsh_depth(l);
            for (t, &s) in rec.iter().enumerate() {
                assert_eq!(walsh_sign(l, t as u64, d), s, "l = {l}, t = {t}");
            }
            // Refining the mesh repeats each sign.
            for t in 0..(2u64 << d) {
                assert_eq!(walsh_sign(l, t, d + 1), rec[(t / 2) as usize]);
            }
        }
    }

    #[test]
    fn walsh_function_on_grid() {
        let w0 = walsh_function(0, 2).unwrap();
        assert_eq!(w0, StepFunction::indicator(2, &DyadicInterval::new(0, 0)).unwrap());
        assert!(walsh_function(8, 2).is_err());
    }

    #[test]
    fn packet_examples() {
        let g = AmbientGrid::new(2).unwrap();
        let p = Tile::new(0, 0, 0);
        assert_eq!(wave_packet(&g, &p).unwrap(), StepFunction::indicator(2, &DyadicInterval::new(0, 0)).unwrap());
        let q = Tile::new(1, 0, 1);
        let phi = wave_packet(&g, &q).unwrap();
        assert_eq!(
            phi.cells(),
            vec![
                (DyadicInterval::new(-2, 0), QuadExt::sqrt2()),
                (DyadicInterval::new(-2, 1), -QuadExt::sqrt2()),
            ]
        );
        let r = Tile::new(0, 1, 0);
        assert_eq!(wave_packet(&g, &r).unwrap(), StepFunction::indicator(2, &DyadicInterval::new(0, 1)).unwrap());
        assert_eq!(phi.l2_squared_exact(), QuadExt::one());
    }

    #[test]
    fn analysis_examples() {
        let g = AmbientGrid::new(2).unwrap();
        let q = Quartile::new(0, 0, 0);
        let coll = Collection::new(&g, vec![q]).unwrap();
        let w1 = walsh_function(1, 2).unwrap();
        let seq = analyze(&w1, &coll, &[1, 2]).unwrap();
        assert_eq!(seq.get(&q, 2), QuadExt::one());
        assert!(seq.get(&q, 1).is_zero());
        let phi = wave_packet(&g, &q.subtile(1)).unwrap();
        assert_eq!(analyze(&phi, &coll, &[1]).unwrap().get(&q, 1), QuadExt::one());
        let far = StepFunction::indicator(2, &DyadicInterval::new(0, 3)).unwrap();
        assert!(analyze(&far, &coll, &[1, 2, 3]).unwrap().is_empty());
    }

    #[test]
    fn packet_inner_matches_integration() {
        let g = AmbientGrid::new(3).unwrap();
        let tiles = crate::tiles::enumerate_tiles(&g);
        for (a, p) in tiles.iter().enumerate().step_by(7) {
            for q in tiles.iter().skip(a % 5).step_by(11) {
                let direct = wave_packet(&g, p).unwrap().inner_product(&wave_packet(&g, q).unwrap()).unwrap();
                assert_eq!(packet_inner(&g, p, q), direct);
            }
        }
    }
}
