//! `size''_1` and `energy''_1`, built from the tree functions
//! `F_T = Σ_{Q ∈ T} ⟨g, φ_{Q_1}⟩ φ_{Q_1} Σ_{P ∈ T̃ ; ω_{Q_1} ⊆ ω_{P_2}} ⟨h, φ_{P_1}⟩ φ_{P_1}`.
//!
//! The norms of `F_T` are not monotone in `T`, so restricting the sups to
//! maximal trees only gives lower bounds; the exhaustive mode enumerates
//! every subtree of a small collection.

use serde::Serialize;

use super::{maximal_tree, tops, Domain, Tree};
use crate::dyadic::{AmbientGrid, StepFunction};
use crate::error::{Error, Result};
use crate::num::{QuadAccumulator, QuadExt};
use crate::tiles::{below_or_equal, Quartile, Rect, TileCollection};

/// Largest `Q` collection the exhaustive mode accepts.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoublePrimeMode {
    /// Every subtree and every admissible family of trees.
    Exhaustive,
    /// Maximal trees per ambient top and greedy families: a lower bound.
    MaximalTree,
    /// Exhaustive when the collection is small enough, else maximal-tree.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublePrimeValue {
    /// `size''_1`, or `energy''_1` squared.
    pub value: QuadExt,
    /// False when the value is only a lower bound.
    pub exhaustive: bool,
    /// The attaining tree (size) or family (energy).
    pub trees: Vec<Tree>,
}

/// One `(Q, P)` summand of `F_T`, supported on `I_P ⊆ I_Q`.
struct PairTerm {
    q: usize,
    p: usize,
    start: usize,
    plus: QuadExt,
    signs: Vec<i8>,
}

/// Precomputed summands of every `F_T` for fixed `g, h, Q, P`.
pub struct DoublePrimeTerms<'a> {
    grid: &'a AmbientGrid,
    q_coll: &'a TileCollection,
    p_coll: &'a TileCollection,
    pairs: Vec<PairTerm>,
    /// Per `P`: the `Q` with `Q_2 ≤ P_2`, and with `P_2 ≤ Q_2`.
    below: Vec<Vec<usize>>,
    above: Vec<Vec<usize>>,
}

impl<'a> DoublePrimeTerms<'a> {
    pub fn new(g: &StepFunction, h: &StepFunction, q_coll: &'a TileCollection, p_coll: &'a TileCollection) -> Result<Self> {
        let grid = q_coll.grid();
        for m in [p_coll.grid().m(), g.m(), h.m()] {
            if m != grid.m() {
                return Err(Error::GridMismatch { left: grid.m(), right: m });
            }
        }
        let packets = grid.packets();
        let b: Vec<QuadExt> = q_coll.iter().map(|q| packets.get(&q.subtile(1)).inner(g)).collect();
        let a: Vec<QuadExt> = p_coll.iter().map(|p| packets.get(&p.subtile(1)).inner(h)).collect();
        let mut pairs = Vec::new();
        for (t, q) in q_coll.iter().enumerate() {
            if b[t].is_zero() {
                continue;
            }
            let (wq, iq) = (q.subtile(1).freq(), q.interval());
            let qp = packets.get(&q.subtile(1));
            for (s, p) in p_coll.iter().enumerate() {
                // ω_{Q_1} ⊆ ω_{P_2} forces |I_P| ≤ |I_Q|.
                if a[s].is_zero() || !wq.subset_of(&p.subtile(2).freq()) || !p.interval().subset_of(&iq) {
                    continue;
                }
                let pp = packets.get(&p.subtile(1));
                let signs = pp.cells().zip(&pp.signs).map(|(c, &sp)| sp * qp.signs[c - qp.start]).collect();
                let plus = &(&(&b[t] * &a[s]) * &qp.amplitude) * &pp.amplitude;
                pairs.push(PairTerm { q: t, p: s, start: pp.start, plus, signs });
            }
        }
        let rel = |f: &dyn Fn(&Quartile, &Quartile) -> bool| -> Vec<Vec<usize>> {
            p_coll
                .iter()
                .map(|p| q_coll.iter().enumerate().filter(|(_, q)| f(q, p)).map(|(t, _)| t).collect())
                .collect()
        };
        let below = rel(&|q, p| below_or_equal(&q.subtile(2), &p.subtile(2)));
        let above = rel(&|q, p| below_or_equal(&p.subtile(2), &q.subtile(2)));
        Ok(DoublePrimeTerms { grid, q_coll, p_coll, pairs, below, above })
    }

    /// Membership of `T̃` given membership of `T`.
    fn tilde(&self, in_tree: &[bool]) -> Vec<bool> {
        (0..self.p_coll.len())
            .map(|s| self.below[s].iter().any(|&t| in_tree[t]) && self.above[s].iter().any(|&t| in_tree[t]))
            .collect()
    }

    /// `F_T` and `T̃` for the given member set.
    pub fn evaluate(&self, members: &[Quartile]) -> (StepFunction, Vec<Quartile>) {
        let (f, tilde) = self.function(&self.membership(members));
        let tilde = self.p_coll.iter().zip(tilde).filter(|(_, t)| *t).map(|(p, _)| *p).collect();
        (f, tilde)
    }

    fn function(&self, in_tree: &[bool]) -> (StepFunction, Vec<bool>) {
        let tilde = self.tilde(in_tree);
        let mut acc = vec![QuadAccumulator::default(); self.grid.cells()];
        let minus_cache: Vec<QuadExt> = self.pairs.iter().map(|pt| -&pt.plus).collect();
        for (pt, minus) in self.pairs.iter().zip(&minus_cache) {
            if !in_tree[pt.q] || !tilde[pt.p] {
                continue;
            }
            for (off, &s) in pt.signs.iter().enumerate() {
                acc[pt.start + off].add(if s > 0 { &pt.plus } else { minus });
            }
        }
        let f = StepFunction::from_values(self.grid.m(), acc.into_iter().map(QuadAccumulator::finish).collect())
            .expect("grid sized");
        (f, tilde)
    }

    fn membership(&self, members: &[Quartile]) -> Vec<bool> {
        self.q_coll.iter().map(|q| members.contains(q)).collect()
    }

    fn exhaustive_ok(&self) -> bool {
        self.q_coll.len() <= EXHAUSTIVE_LIMIT
    }
}

/// `F_T` for a set of `Q` quartiles.
pub fn tree_function(
    g: &StepFunction,
    h: &StepFunction,
    members: &[Quartile],
    q_coll: &TileCollection,
    p_coll: &TileCollection,
) -> Result<StepFunction> {
    let terms = DoublePrimeTerms::new(g, h, q_coll, p_coll)?;
    Ok(terms.evaluate(members).0)
}

/// The quartile `top` of smallest `|I_top|` in the grid with `Q_i ≤ top_i` for
/// every member, if any.
pub fn minimal_top(members: &[Quartile], i: usize, grid: &AmbientGrid) -> Option<Quartile> {
    let tiles: Vec<_> = members.iter().map(|q| q.subtile(i)).collect();
    let first = tiles.first()?;
    let mut join = first.interval();
    while !tiles.iter().all(|t| t.interval().subset_of(&join)) {
        join = join.parent();
    }
    let w = tiles.iter().map(|t| t.freq()).min_by_key(|w| w.scale)?;
    if !tiles.iter().all(|t| w.subset_of(&t.freq())) {
        return None;
    }
    let m = grid.m() as i32;
    for s in join.scale.max(2 - m)..=m {
        // top_i has frequency length 2^{-s} inside w.
        let d = w.scale + s;
        if d < 0 {
            continue;
        }
        let base = w.index << d;
        let residue = (i - 1) as i64;
        let lambda = (base..base + (1i64 << d)).find(|x| x.rem_euclid(4) == residue)?;
        let top = Quartile::new(-s, join.ancestor(s).index, lambda >> 2);
        return Some(top);
    }
    None
}

fn resolve(mode: DoublePrimeMode, terms: &DoublePrimeTerms) -> Result<bool> {
    match mode {
        DoublePrimeMode::Exhaustive if !terms.exhaustive_ok() => Err(Error::InvalidParameter(format!(
            "exhaustive mode needs at most {EXHAUSTIVE_LIMIT} quartiles, got {}",
            terms.q_coll.len()
        ))),
        DoublePrimeMode::Exhaustive => Ok(true),
        DoublePrimeMode::MaximalTree => Ok(false),
        DoublePrimeMode::Auto => Ok(terms.exhaustive_ok()),
    }
}

fn subset_members(coll: &TileCollection, mask: u32) -> Vec<Quartile> {
    coll.iter().enumerate().filter(|(t, _)| mask >> t & 1 == 1).map(|(_, q)| *q).collect()
}

/// The best tree type and top for a member set: smallest `|I_T|` over `i ∈ {2, 3}`.
fn best_top(members: &[Quartile], grid: &AmbientGrid) -> Option<(usize, Quartile)> {
    [2, 3]
        .into_iter()
        .filter_map(|i| minimal_top(members, i, grid).map(|top| (i, top)))
        .max_by_key(|(i, top)| (top.k(), std::cmp::Reverse(*i)))
}

/// `size''_1(g, h) = sup_T |I_T|^{-1} ‖F_T‖_1` over `i`-trees in `Q`, `i ≠ 1`.
pub fn size_doubleprime(
    g: &StepFunction,
    h: &StepFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
    mode: DoublePrimeMode,
) -> Result<DoublePrimeValue> {
    let terms = DoublePrimeTerms::new(g, h, q_coll, p_coll)?;
    let exhaustive = resolve(mode, &terms)?;
    let mut best = DoublePrimeValue { value: QuadExt::zero(), exhaustive, trees: Vec::new() };
    let mut consider = |value: QuadExt, tree: Tree| {
        if value > best.value {
            best.value = value;
            best.trees = vec![tree];
        }
    };
    if exhaustive {
        for mask in 1u32..(1 << q_coll.len()) {
            let members = subset_members(q_coll, mask);
            let Some((i, top)) = best_top(&members, q_coll.grid()) else { continue };
            let (f, _) = terms.function(&terms.membership(&members));
            consider(f.l1_exact().scale_pow2(top.k()), Tree { top, tree_type: i, members });
        }
    } else {
        for top in tops(q_coll, Domain::Ambient) {
            for i in [2, 3] {
                let tree = maximal_tree(&top, q_coll, i);
                if tree.is_empty() {
                    continue;
                }
                let (f, _) = terms.function(&terms.membership(&tree.members));
                consider(f.l1_exact().scale_pow2(top.k()), tree);
            }
        }
    }
    Ok(best)
}

struct Candidate {
    tree: Tree,
    weight: QuadExt,
    members: Vec<bool>,
    tilde: Vec<bool>,
}

fn overlaps(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).any(|(x, y)| *x && *y)
}

fn compatible(a: &Candidate, b: &Candidate) -> bool {
    !overlaps(&a.members, &b.members) && !overlaps(&a.tilde, &b.tilde)
}

/// `energy''_1(g, h)²`: the sup over families of member-disjoint trees with
/// disjoint `T̃` of `Σ_T ‖F_T‖²_2`.
pub fn energy_doubleprime(
    g: &StepFunction,
    h: &StepFunction,
    q_coll: &TileCollection,
    p_coll: &TileCollection,
    mode: DoublePrimeMode,
) -> Result<DoublePrimeValue> {
    let terms = DoublePrimeTerms::new(g, h, q_coll, p_coll)?;
    let exhaustive = resolve(mode, &terms)?;
    let mut candidates = Vec::new();
    let mut push = |tree: Tree| {
        let members = terms.membership(&tree.members);
        let (f, tilde) = terms.function(&members);
        let weight = f.l2_squared_exact();
        if !weight.is_zero() {
            candidates.push(Candidate { tree, weight, members, tilde });
        }
    };
    if exhaustive {
        for mask in 1u32..(1 << q_coll.len()) {
            let members = subset_members(q_coll, mask);
            if let Some((i, top)) = best_top(&members, q_coll.grid()) {
                push(Tree { top, tree_type: i, members });
            }
        }
    } else {
        for top in tops(q_coll, Domain::Ambient) {
            for i in [2, 3] {
                let tree = maximal_tree(&top, q_coll, i);
                if !tree.is_empty() {
                    push(tree);
                }
            }
        }
    }
    candidates.sort_by(|a, b| b.weight.cmp(&a.weight));
    let chosen = if exhaustive { pack_exact(&candidates) } else { pack_greedy(&candidates) };
    let value = chosen.iter().map(|&c| candidates[c].weight.clone()).sum();
    let trees = chosen.iter().map(|&c| candidates[c].tree.clone()).collect();
    Ok(DoublePrimeValue { value, exhaustive, trees })
}

fn pack_greedy(cands: &[Candidate]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for (c, cand) in cands.iter().enumerate() {
        if chosen.iter().all(|&d| compatible(cand, &cands[d])) {
            chosen.push(c);
        }
    }
    chosen
}

/// Branch and bound over candidates sorted by decreasing weight.
fn pack_exact(cands: &[Candidate]) -> Vec<usize> {
    let mut suffix = vec![QuadExt::zero(); cands.len() + 1];
    for c in (0..cands.len()).rev() {
        suffix[c] = &suffix[c + 1] + &cands[c].weight;
    }
    let mut best = (QuadExt::zero(), Vec::new());
    let mut current = Vec::new();
    search(cands, &suffix, 0, QuadExt::zero(), &mut current, &mut best);
    best.1
}

fn search(
    cands: &[Candidate],
    suffix: &[QuadExt],
    c: usize,
    value: QuadExt,
    current: &mut Vec<usize>,
    best: &mut (QuadExt, Vec<usize>),
) {
    if value > best.0 {
        *best = (value.clone(), current.clone());
    }
    if c == cands.len() || &value + &suffix[c] <= best.0 {
        return;
    }
    if current.iter().all(|&d| compatible(&cands[c], &cands[d])) {
        current.push(c);
        search(cands, suffix, c + 1, &value + &cands[c].weight, current, best);
        current.pop();
    }
    search(cands, suffix, c + 1, value, current, best);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiles::enumerate_quartiles;

    #[test]
    fn zero_g_vanishes() {
        let grid = AmbientGrid::new(2).unwrap();
        let q = TileCollection::new(&grid, enumerate_quartiles(&grid).into_iter().take(5).collect()).unwrap();
        let h = StepFunction::from_fn(2, |c| QuadExt::integer(c as i64 % 3 - 1));
        let z = StepFunction::zero(2);
        for mode in [DoublePrimeMode::Exhaustive, DoublePrimeMode::MaximalTree] {
            assert!(size_doubleprime(&z, &h, &q, &q, mode).unwrap().value.is_zero());
            assert!(energy_doubleprime(&z, &h, &q, &q, mode).unwrap().value.is_zero());
        }
    }

    #[test]
    fn minimal_top_matches_ambient_search() {
        let grid = AmbientGrid::new(3).unwrap();
        let all = enumerate_quartiles(&grid);
        for (a, b) in all.iter().zip(all.iter().skip(7)).step_by(5) {
            for i in 1..=3 {
                let members = [*a, *b];
                let brute = all
                    .iter()
                    .filter(|t| members.iter().all(|q| below_or_equal(&q.subtile(i), &t.subtile(i))))
                    .map(|t| t.k())
                    .max();
                assert_eq!(minimal_top(&members, i, &grid).map(|t| t.k()), brute, "{a} {b} {i}");
            }
        }
    }
}
