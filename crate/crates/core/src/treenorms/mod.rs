//! Trees, the size and energy functionals on tile collections, and the
//! antichain solver that evaluates every energy.
//!
//! Squared values are returned for `size_j`, `energy_j` and the
//! John–Nirenberg quantity; all other functionals are linear. Every sup over
//! trees takes its tops from the whole ambient grid unless a
//! [`Domain::Collection`] is requested.

mod antichain;
mod doubleprime;

use std::collections::HashMap;

use serde::Serialize;

use crate::dyadic::{AmbientGrid, ChoiceFunction, DyadicInterval, StepFunction};
use crate::error::{Error, Result};
use crate::num::{QuadAccumulator, QuadExt};
use crate::operators::c_complement;
use crate::tiles::{below_or_equal, enumerate_quartiles, Bitile, Quartile, Rect, TileCollection};
use crate::wavepacket::CoefficientSequence;

pub use antichain::{max_weight_antichain, Antichain, AntichainMode, AntichainProblem};
pub use doubleprime::{
    energy_doubleprime, minimal_top, size_doubleprime, tree_function, DoublePrimeMode, DoublePrimeTerms, DoublePrimeValue,
    EXHAUSTIVE_LIMIT,
};

/// Where tree tops and witness bitiles are drawn from.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Every rectangle of the ambient grid.
    #[default]
    Ambient,
    /// Only rectangles derived from the collection's own members.
    Collection,
}

/// A `j`-tree: members `P` with `P_j ≤ top_j`. The top need not be a member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tree {
    pub top: Quartile,
    pub tree_type: usize,
    pub members: Vec<Quartile>,
}

impl Tree {
    pub fn new(top: Quartile, tree_type: usize, mut members: Vec<Quartile>) -> Result<Self> {
        check_index(tree_type)?;
        let top_j = top.subtile(tree_type);
        if let Some(p) = members.iter().find(|p| !below_or_equal(&p.subtile(tree_type), &top_j)) {
            return Err(Error::Precondition(format!("{p} is not in the {tree_type}-tree with top {top}")));
        }
        members.sort();
        members.dedup();
        Ok(Tree { top, tree_type, members })
    }

    pub fn interval(&self) -> DyadicInterval {
        self.top.interval()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: &Quartile) -> bool {
        self.members.binary_search(p).is_ok()
    }
}

fn check_index(j: usize) -> Result<()> {
    if (1..=3).contains(&j) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tile index {j} not in 1..=3")))
    }
}

fn check_grid(grid: &AmbientGrid, m: u32) -> Result<()> {
    if grid.m() != m {
        return Err(Error::GridMismatch { left: grid.m(), right: m });
    }
    Ok(())
}

/// `{P ∈ coll : P_i ≤ top_i}`.
pub fn maximal_tree(top: &Quartile, coll: &TileCollection, i: usize) -> Tree {
    let top_i = top.subtile(i);
    let members = coll.iter().filter(|p| below_or_equal(&p.subtile(i), &top_i)).copied().collect();
    Tree { top: *top, tree_type: i, members }
}

/// `T̃ = {P ∈ P : ∃ Q', Q'' ∈ T with Q'_2 ≤ P_2 ≤ Q''_2}`.
pub fn tilde_tree(tree: &[Quartile], p_coll: &TileCollection) -> Vec<Quartile> {
    p_coll
        .iter()
        .filter(|p| {
            let p2 = p.subtile(2);
            tree.iter().any(|q| below_or_equal(&q.subtile(2), &p2)) && tree.iter().any(|q| below_or_equal(&p2, &q.subtile(2)))
        })
        .copied()
        .collect()
}

/// Candidate tree tops.
pub fn tops(coll: &TileCollection, domain: Domain) -> Vec<Quartile> {
    match domain {
        Domain::Ambient => enumerate_quartiles(coll.grid()),
        Domain::Collection => coll.members().to_vec(),
    }
}

fn other_indices(j: usize) -> impl Iterator<Item = usize> {
    (1..=3).filter(move |&i| i != j)
}

/// `|I_T|^{-1} Σ_{P ∈ T} |a_{P_j}|²`.
pub fn tree_average(seq: &CoefficientSequence, tree: &Tree, j: usize) -> QuadExt {
    let mut acc = QuadAccumulator::default();
    for p in &tree.members {
        acc.add(&seq.get(p, j).square());
    }
    acc.finish().scale_pow2(tree.top.k())
}

/// Squared `size_j` and a tree attaining it, if the collection is nonempty.
pub fn size_scalar_witness(
    seq: &CoefficientSequence,
    coll: &TileCollection,
    j: usize,
    domain: Domain,
) -> Result<(QuadExt, Option<Tree>)> {
    check_index(j)?;
    let mut best = (QuadExt::zero(), None);
    for top in tops(coll, domain) {
        for i in other_indices(j) {
            let tree = maximal_tree(&top, coll, i);
            if tree.is_empty() {
                continue;
            }
            let v = tree_average(seq, &tree, j);
            if best.1.is_none() || v > best.0 {
                best = (v, Some(tree));
            }
        }
    }
    Ok(best)
}

/// `size_j(a)²` with ambient tops.
pub fn size_scalar(seq: &CoefficientSequence, coll: &TileCollection, j: usize) -> Result<QuadExt> {
    Ok(size_scalar_witness(seq, coll, j, Domain::Ambient)?.0)
}

/// `energy_j(a)²` and a maximizing family `D`.
pub fn energy_scalar_witness(
    seq: &CoefficientSequence,
    coll: &TileCollection,
    j: usize,
    mode: AntichainMode,
) -> Result<(QuadExt, Vec<Quartile>)> {
    check_index(j)?;
    let items = coll.iter().map(|p| p.subtile(j)).collect();
    let weights = coll.iter().map(|p| seq.get(p, j).square()).collect();
    let best = max_weight_antichain(&AntichainProblem::new(items, weights)?, mode);
    Ok((best.value, best.witness.iter().map(|&t| coll.members()[t]).collect()))
}

/// `energy_j(a)²`.
pub fn energy_scalar(seq: &CoefficientSequence, coll: &TileCollection, j: usize) -> Result<QuadExt> {
    Ok(energy_scalar_witness(seq, coll, j, AntichainMode::MinCut)?.0)
}

/// Squared right side of the John–Nirenberg characterization:
/// `sup_T |I_T|^{-2} ‖(Σ_{P ∈ T} |a_{P_j}|² χ_{I_P}/|I_P|)^{1/2}‖²_{L^{1,∞}(I_T)}`.
pub fn jn_weak_size(seq: &CoefficientSequence, coll: &TileCollection, j: usize) -> Result<QuadExt> {
    check_index(j)?;
    let grid = coll.grid();
    let mut best = QuadExt::zero();
    for top in tops(coll, Domain::Ambient) {
        for i in other_indices(j) {
            let tree = maximal_tree(&top, coll, i);
            if tree.is_empty() {
                continue;
            }
            best = best.max(tree_weak_square(grid, seq, &tree, j));
        }
    }
    Ok(best)
}

fn tree_weak_square(grid: &AmbientGrid, seq: &CoefficientSequence, tree: &Tree, j: usize) -> QuadExt {
    let range = grid.cell_range(&tree.interval());
    let base = range.start;
    let mut acc = vec![QuadAccumulator::default(); range.len()];
    for p in &tree.members {
        let w = seq.get(p, j).square().scale_pow2(p.k());
        if w.is_zero() {
            continue;
        }
        for c in grid.cell_range(&p.interval()) {
            acc[c - base].add(&w);
        }
    }
    let mut values: Vec<QuadExt> = acc.into_iter().map(QuadAccumulator::finish).collect();
    values.sort_by(|a, b| b.cmp(a));
    let m = grid.m() as i32;
    let mut best = QuadExt::zero();
    for (t, v) in values.iter().enumerate() {
        if v.is_zero() {
            break;
        }
        // λ just below v^{1/2}: the level set is every cell with value ≥ v.
        let count = values[t..].iter().take_while(|u| *u == v).count() + t;
        let measure = QuadExt::integer(count as i64).scale_pow2(-m);
        best = best.max(v * &measure.square());
    }
    best.scale_pow2(2 * tree.top.k())
}

/// Sub-bitiles `Q'_{12}` of grid quartiles lying strictly above `b` in the
/// bitile order. These have even frequency index.
pub fn bitiles_above(b: &Bitile, grid: &AmbientGrid) -> Vec<Bitile> {
    let m = grid.m() as i32;
    let mut out = Vec::new();
    for kb in -m..b.k() {
        let d = (b.k() - kb) as u32;
        let nb = b.n() >> d;
        for lb in ((b.l() << d)..((b.l() + 1) << d)).step_by(2) {
            out.push(Bitile::new(kb, nb, lb));
        }
    }
    out
}

/// `Σ_{c ∈ I, N(c) ∈ ω} |g_c| 2^{-M}` for values already made nonnegative.
fn masked_integral(grid: &AmbientGrid, abs_values: &[QuadExt], n: &ChoiceFunction, i: &DyadicInterval, w: &DyadicInterval) -> QuadExt {
    let mut acc = QuadAccumulator::default();
    for c in grid.cell_range(i) {
        if !abs_values[c].is_zero() && n.in_freq(c, w) {
            acc.add(&abs_values[c]);
        }
    }
    acc.finish().scale_pow2(-(grid.m() as i32))
}

/// `|I_B|^{-1} ∫_{I_B} |g| χ_{N ∈ ω_B}`.
fn masked_average(grid: &AmbientGrid, abs_values: &[QuadExt], n: &ChoiceFunction, b: &Bitile) -> QuadExt {
    masked_integral(grid, abs_values, n, &b.interval(), &b.freq()).scale_pow2(b.k())
}

/// Bitiles `P'` over which the sups `sup_{P_{12} < P'}` range.
#[derive(Copy, Clone, Debug)]
pub enum Witnesses<'a> {
    Ambient,
    /// The sub-bitiles `Q_{12}` of a fixed collection.
    Pool(&'a TileCollection),
}

impl<'a> Witnesses<'a> {
    pub fn from_domain(domain: Domain, coll: &'a TileCollection) -> Self {
        match domain {
            Domain::Ambient => Witnesses::Ambient,
            Domain::Collection => Witnesses::Pool(coll),
        }
    }

    fn above(&self, q: &Quartile, grid: &AmbientGrid) -> Vec<Bitile> {
        let b = q.p12();
        match self {
            Witnesses::Ambient => bitiles_above(&b, grid),
            Witnesses::Pool(pool) => pool.iter().map(|p| p.p12()).filter(|c| crate::tiles::strictly_below(&b, c)).collect(),
        }
    }
}

/// Largest witness average and its bitile, for the quartile `q`.
fn best_witness(
    q: &Quartile,
    grid: &AmbientGrid,
    witnesses: Witnesses,
    mut average: impl FnMut(&Bitile) -> QuadExt,
) -> (QuadExt, Option<Bitile>) {
    let mut best = (QuadExt::zero(), None);
    for b in witnesses.above(q, grid) {
        let v = average(&b);
        if best.1.is_none() || v > best.0 {
            best = (v, Some(b));
        }
    }
    best
}

/// Per-quartile `sup_{P_{12} < P'} |I_{P'}|^{-1} ∫_{I_{P'}} |G| χ_{N ∈ ω_{P'}}`
/// with the attaining bitile.
pub fn b_size_terms(
    g: &StepFunction,
    n: &ChoiceFunction,
    coll: &TileCollection,
    witnesses: Witnesses,
) -> Result<Vec<(Quartile, QuadExt, Option<Bitile>)>> {
    let grid = coll.grid();
    check_grid(grid, g.m())?;
    check_grid(grid, n.m())?;
    let abs = g.abs();
    let mut cache: HashMap<Bitile, QuadExt> = HashMap::new();
    Ok(coll
        .iter()
        .map(|q| {
            let (v, b) = best_witness(q, grid, witnesses, |b| {
                cache.entry(*b).or_insert_with(|| masked_average(grid, abs.values(), n, b)).clone()
            });
            (*q, v, b)
        })
        .collect())
}

/// `size((b_{P_2}))` for `b_{P_2} = ⟨G χ_{N ∈ ω_{P_2}}, φ_{P_1}⟩`.
pub fn b_size(g: &StepFunction, n: &ChoiceFunction, coll: &TileCollection) -> Result<QuadExt> {
    b_size_in(g, n, coll, Domain::Ambient)
}

pub fn b_size_in(g: &StepFunction, n: &ChoiceFunction, coll: &TileCollection, domain: Domain) -> Result<QuadExt> {
    Ok(b_size_terms(g, n, coll, Witnesses::from_domain(domain, coll))?.into_iter().fold(QuadExt::zero(), |a, (_, v, _)| a.max(v)))
}

/// `energy((b_{P_2}))` and a maximizing family of quartiles.
pub fn b_energy_witness(
    g: &StepFunction,
    n: &ChoiceFunction,
    coll: &TileCollection,
    mode: AntichainMode,
) -> Result<(QuadExt, Vec<Quartile>)> {
    let grid = coll.grid();
    check_grid(grid, g.m())?;
    check_grid(grid, n.m())?;
    let abs = g.abs();
    let items: Vec<Bitile> = coll.iter().map(|p| p.p12()).collect();
    let weights = items.iter().map(|b| masked_integral(grid, abs.values(), n, &b.interval(), &b.freq())).collect();
    let best = max_weight_antichain(&AntichainProblem::new(items, weights)?, mode);
    Ok((best.value, best.witness.iter().map(|&t| coll.members()[t]).collect()))
}

pub fn b_energy(g: &StepFunction, n: &ChoiceFunction, coll: &TileCollection) -> Result<QuadExt> {
    Ok(b_energy_witness(g, n, coll, AntichainMode::MinCut)?.0)
}

/// `|C^c_{Q',P}(f_1) f_3|`, which depends on `Q'` only through `ω_{Q'_1}`.
struct PrimeField<'a> {
    p_coll: &'a TileCollection,
    f1: &'a StepFunction,
    f3: &'a StepFunction,
    n: &'a ChoiceFunction,
    cache: HashMap<DyadicInterval, StepFunction>,
}

impl<'a> PrimeField<'a> {
    fn new(p_coll: &'a TileCollection, f1: &'a StepFunction, f3: &'a StepFunction, n: &'a ChoiceFunction) -> Self {
        PrimeField { p_coll, f1, f3, n, cache: HashMap::new() }
    }

    fn get(&mut self, b: &Bitile) -> Result<&StepFunction> {
        let key = b.subtile(1).freq();
        if !self.cache.contains_key(&key) {
            let g = c_complement(b, self.p_coll, self.f1, self.n)?.mul(self.f3)?.abs();
            self.cache.insert(key, g);
        }
        Ok(&self.cache[&key])
    }
}

fn check_prime(
    q_coll: &TileCollection,
    p_coll: &TileCollection,
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
) -> Result<()> {
    check_grid(q_coll.grid(), p_coll.grid().m())?;
    check_grid(q_coll.grid(), f1.m())?;
    check_grid(q_coll.grid(), f3.m())?;
    check_grid(q_coll.grid(), n.m())
}

/// Per-quartile witness averages for `size'`.
pub fn size_prime_terms(
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
    witnesses: Witnesses,
) -> Result<Vec<(Quartile, QuadExt, Option<Bitile>)>> {
    check_prime(q_coll, p_coll, f1, f3, n)?;
    let grid = q_coll.grid();
    let mut field = PrimeField::new(p_coll, f1, f3, n);
    let mut averages: HashMap<Bitile, QuadExt> = HashMap::new();
    let mut out = Vec::with_capacity(q_coll.len());
    for q in q_coll {
        let mut best = (QuadExt::zero(), None);
        for b in witnesses.above(q, grid) {
            let v = match averages.get(&b) {
                Some(v) => v.clone(),
                None => {
                    let v = masked_average(grid, field.get(&b)?.values(), n, &b);
                    averages.insert(b, v.clone());
                    v
                }
            };
            if best.1.is_none() || v > best.0 {
                best = (v, Some(b));
            }
        }
        out.push((*q, best.0, best.1));
    }
    Ok(out)
}

/// `size'(f_1, f_3)` over `Q` with Carleson pieces from `P`.
pub fn size_prime(
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
) -> Result<QuadExt> {
    size_prime_in(f1, f3, n, q_coll, p_coll, Domain::Ambient)
}

pub fn size_prime_in(
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
    domain: Domain,
) -> Result<QuadExt> {
    let terms = size_prime_terms(f1, f3, n, q_coll, p_coll, Witnesses::from_domain(domain, q_coll))?;
    Ok(terms.into_iter().fold(QuadExt::zero(), |a, (_, v, _)| a.max(v)))
}

/// Per-quartile `∫_{I_Q} |C^c_{Q,P}(f_1) f_3| χ_{N ∈ ω_{Q_{12}}}`.
pub fn energy_prime_weights(
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
) -> Result<Vec<QuadExt>> {
    check_prime(q_coll, p_coll, f1, f3, n)?;
    let grid = q_coll.grid();
    let mut field = PrimeField::new(p_coll, f1, f3, n);
    q_coll
        .iter()
        .map(|q| {
            let b = q.p12();
            Ok(masked_integral(grid, field.get(&b)?.values(), n, &b.interval(), &b.freq()))
        })
        .collect()
}

pub fn energy_prime_witness(
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
    mode: AntichainMode,
) -> Result<(QuadExt, Vec<Quartile>)> {
    let weights = energy_prime_weights(f1, f3, n, q_coll, p_coll)?;
    let items = q_coll.iter().map(|q| q.p12()).collect();
    let best = max_weight_antichain(&AntichainProblem::new(items, weights)?, mode);
    Ok((best.value, best.witness.iter().map(|&t| q_coll.members()[t]).collect()))
}

/// `energy'(f_1, f_3)`.
pub fn energy_prime(
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
) -> Result<QuadExt> {
    Ok(energy_prime_witness(f1, f3, n, q_coll, p_coll, AntichainMode::MinCut)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::DyadicRational;
    use crate::wavepacket::analyze;

    fn grid(m: u32) -> AmbientGrid {
        AmbientGrid::new(m).unwrap()
    }

    #[test]
    fn maximal_tree_basics() {
        let g = grid(2);
        let top = Quartile::new(0, 0, 0);
        assert!(maximal_tree(&top, &TileCollection::empty(&g), 1).is_empty());
        let coll = TileCollection::new(&g, vec![top]).unwrap();
        assert_eq!(maximal_tree(&top, &coll, 2).members, vec![top]);
    }

    #[test]
    fn tree_rejects_non_members() {
        let top = Quartile::new(0, 0, 0);
        assert!(Tree::new(top, 1, vec![Quartile::new(0, 1, 0)]).is_err());
        assert!(Tree::new(top, 4, vec![]).is_err());
    }

    #[test]
    fn tilde_of_singleton_contains_equal_second_tile() {
        let g = grid(2);
        let q = Quartile::new(0, 0, 0);
        let coll = TileCollection::new(&g, vec![q, Quartile::new(0, 1, 0)]).unwrap();
        assert_eq!(tilde_tree(&[q], &coll), vec![q]);
        assert!(tilde_tree(&[], &coll).is_empty());
    }

    #[test]
    fn single_quartile_size() {
        let g = grid(3);
        let q = Quartile::new(1, 0, 0);
        let coll = TileCollection::new(&g, vec![q]).unwrap();
        let mut seq = CoefficientSequence::new();
        seq.insert(q, 1, QuadExt::integer(3));
        // The best top is the quartile itself: 9 / |I_P| = 18.
        assert_eq!(size_scalar(&seq, &coll, 1).unwrap(), QuadExt::integer(18));
        assert_eq!(energy_scalar(&seq, &coll, 1).unwrap(), QuadExt::integer(9));
    }

    #[test]
    fn empty_collection_norms_vanish() {
        let g = grid(2);
        let coll = TileCollection::empty(&g);
        let seq = CoefficientSequence::new();
        assert!(size_scalar(&seq, &coll, 2).unwrap().is_zero());
        assert!(energy_scalar(&seq, &coll, 2).unwrap().is_zero());
        assert!(jn_weak_size(&seq, &coll, 2).unwrap().is_zero());
    }

    #[test]
    fn b_energy_of_indicator() {
        let g = grid(2);
        let q = Quartile::new(0, 1, 0);
        let coll = TileCollection::new(&g, vec![q]).unwrap();
        let gf = StepFunction::indicator(2, &q.interval()).unwrap();
        // N = 1/2 lies in ω_{P_{12}} = [0, 2).
        let n = ChoiceFunction::constant(2, DyadicRational::new(1i64, 1)).unwrap();
        assert_eq!(b_energy(&gf, &n, &coll).unwrap(), QuadExt::one());
        assert!(b_energy(&StepFunction::zero(2), &n, &coll).unwrap().is_zero());
        assert!(b_size(&StepFunction::zero(2), &n, &coll).unwrap().is_zero());
    }

    #[test]
    fn bitiles_above_are_strictly_above() {
        let g = grid(3);
        let b = Bitile::new(1, 3, 1);
        assert!(b.in_grid(&g));
        let above = bitiles_above(&b, &g);
        assert!(above.iter().all(|c| crate::tiles::strictly_below(&b, c) && c.in_grid(&g)));
        let brute = crate::tiles::enumerate_quartiles(&g).into_iter().filter(|q| crate::tiles::strictly_below(&b, &q.p12())).count();
        assert_eq!(above.len(), brute);
    }

    #[test]
    fn jn_single_tile() {
        let g = grid(2);
        let q = Quartile::new(0, 0, 0);
        let coll = TileCollection::new(&g, vec![q]).unwrap();
        let f = StepFunction::indicator(2, &q.interval()).unwrap();
        let seq = analyze(&f, &coll, &[1]).unwrap();
        // One tile: F = |a| on I_P, so both sides agree.
        assert_eq!(jn_weak_size(&seq, &coll, 1).unwrap(), size_scalar(&seq, &coll, 1).unwrap());
    }
}
