//! Tree selection: splitting a collection into a low-size remainder and a
//! forest of trees with controlled total top length, for `size_j`, the
//! Carleson size, `size'` and `size''_1`, and the partitions obtained by
//! iterating each selection over levels `n`.
//!
//! Every comparison is made on squares, `size² ≤ 2^{-2n} E²`, so linear and
//! squared functionals share one exact code path. Postconditions are
//! re-measured after each run and reported in a [`Certificate`].

use serde::Serialize;

use crate::dyadic::{ChoiceFunction, StepFunction};
use crate::error::{Error, Result};
use crate::num::{DyadicRational, QuadExt};
use crate::tiles::{below_or_equal, enumerate_quartiles, strictly_below, tiles_disjoint, Bitile, Quartile, Rect, TileCollection};
use crate::treenorms::{
    b_energy, b_size_terms, energy_doubleprime, energy_prime, energy_scalar, maximal_tree, minimal_top, size_doubleprime,
    size_prime_terms, size_scalar, tilde_tree, tree_average, Domain, DoublePrimeMode, DoublePrimeTerms, Tree, Witnesses,
};
use crate::wavepacket::analyze;

/// Default constant in the certified bound `Σ |I_T| ≤ C₀ 2^{κn}`.
pub const DEFAULT_C0: i64 = 32;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecomposeOptions {
    pub c0: i64,
    /// Witness pool for the Carleson size and `size'`: the whole input
    /// collection, or every bitile of the grid.
    pub witnesses: Domain,
    /// Run the `size''` selection separately on even and odd scales.
    pub parity_split: bool,
    /// Select `size''` trees as `{Q : Q_i < Q⁰_i}` instead of `Q_i ≤ Q⁰_i`.
    pub strict_trees: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { c0: DEFAULT_C0, witnesses: Domain::Collection, parity_split: true, strict_trees: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// Squared size of the remainder.
    pub remainder_size_sq: QuadExt,
    /// `2^{-2n-2} E²`.
    pub threshold_sq: QuadExt,
    pub size_ok: bool,
    /// `Σ_T |I_T|`.
    pub tree_sum: DyadicRational,
    /// `C₀ 2^{κn}`.
    pub tree_bound: DyadicRational,
    pub trees_ok: bool,
    /// Pairwise disjointness of the selected `Q_1` and `T̃` tiles (`size''` only).
    pub disjoint_ok: Option<bool>,
    /// Exhaustive re-measurement of the remainder, when small enough (`size''` only).
    pub exhaustive_size_ok: Option<bool>,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.size_ok && self.trees_ok && self.disjoint_ok.unwrap_or(true)
    }

    /// `Σ |I_T| / 2^{κn}`, the empirical constant.
    pub fn tree_constant(&self, c0: i64) -> f64 {
        self.tree_sum.to_f64() * c0 as f64 / self.tree_bound.to_f64()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub n: i32,
    pub remainder: TileCollection,
    pub forest: Vec<Tree>,
    pub certificate: Certificate,
}

impl DecompositionResult {
    pub fn selected(&self) -> Vec<Quartile> {
        let mut out: Vec<Quartile> = self.forest.iter().flat_map(|t| t.members.iter().copied()).collect();
        out.sort();
        out
    }
}

fn threshold_sq(e_sq: &QuadExt, n: i32) -> QuadExt {
    e_sq.scale_pow2(-2 * n)
}

fn require(size_sq: &QuadExt, e_sq: &QuadExt, n: i32) -> Result<()> {
    if *size_sq > threshold_sq(e_sq, n) {
        return Err(Error::Precondition(format!(
            "size² = {:.6e} exceeds 2^(-2n) E² = {:.6e} at n = {n}",
            size_sq.to_f64(),
            threshold_sq(e_sq, n).to_f64()
        )));
    }
    Ok(())
}

fn tree_sum(forest: &[Tree]) -> DyadicRational {
    forest.iter().fold(DyadicRational::zero(), |acc, t| &acc + &t.interval().length())
}

fn certify(
    n: i32,
    kappa: i32,
    e_sq: &QuadExt,
    remainder_size_sq: QuadExt,
    forest: &[Tree],
    opts: &DecomposeOptions,
) -> Certificate {
    let threshold = threshold_sq(e_sq, n + 1);
    let sum = tree_sum(forest);
    let bound = &DyadicRational::integer(opts.c0) * &DyadicRational::pow2(kappa * n);
    Certificate {
        size_ok: remainder_size_sq <= threshold,
        remainder_size_sq,
        threshold_sq: threshold,
        trees_ok: sum <= bound,
        tree_sum: sum,
        tree_bound: bound,
        disjoint_ok: None,
        exhaustive_size_ok: None,
    }
}

fn remove(work: &mut Vec<Quartile>, gone: &[Quartile]) {
    work.retain(|q| !gone.contains(q));
}

fn other_indices(j: usize) -> impl Iterator<Item = usize> {
    (1..=3).filter(move |&i| i != j)
}

/// Among candidate tops, those whose `i`-tile is maximal in the tile order.
fn maximal_tops(cands: &[Quartile], i: usize) -> Vec<Quartile> {
    cands
        .iter()
        .filter(|t| !cands.iter().any(|u| strictly_below(&t.subtile(i), &u.subtile(i))))
        .copied()
        .collect()
}

/// The top with extremal `ξ`; ties broken by `(k, n)`.
fn extremal_top(tops: &[Quartile], minimal: bool) -> Option<Quartile> {
    tops.iter().copied().min_by(|a, b| {
        let by_center = if minimal { a.center().cmp(&b.center()) } else { b.center().cmp(&a.center()) };
        by_center.then((a.k(), a.n()).cmp(&(b.k(), b.n())))
    })
}

/// Selection for `size_j` of `(⟨f, φ_{P_j}⟩)`: repeatedly take an ambient top
/// whose maximal `i`-tree (`i ≠ j`) violates `2^{-n-1} E`, with the top's
/// `i`-tile maximal and `ξ` extremal, and remove that `i`-tree together with
/// the `j`-tree of the same top.
pub fn decomp_size(
    coll: &TileCollection,
    j: usize,
    f: &StepFunction,
    n: i32,
    e_sq: &QuadExt,
    opts: &DecomposeOptions,
) -> Result<DecompositionResult> {
    let seq = analyze(f, coll, &[j])?;
    require(&size_scalar(&seq, coll, j)?, e_sq, n)?;
    let threshold = threshold_sq(e_sq, n + 1);
    let ambient = enumerate_quartiles(coll.grid());
    let mut work = coll.members().to_vec();
    let mut forest = Vec::new();
    for i in other_indices(j) {
        loop {
            let current = coll.with_members(work.clone());
            let cands: Vec<Quartile> = ambient
                .iter()
                .filter(|top| {
                    let tree = maximal_tree(top, &current, i);
                    !tree.is_empty() && tree_average(&seq, &tree, j) > threshold
                })
                .copied()
                .collect();
            let Some(top) = extremal_top(&maximal_tops(&cands, i), i > j) else { break };
            let tree = maximal_tree(&top, &current, i);
            remove(&mut work, &tree.members);
            let partner = maximal_tree(&top, &coll.with_members(work.clone()), j);
            remove(&mut work, &partner.members);
            forest.push(tree);
            if !partner.is_empty() {
                forest.push(partner);
            }
        }
    }
    let remainder = coll.with_members(work);
    let size_sq = size_scalar(&seq, &remainder, j)?;
    let certificate = certify(n, 2, e_sq, size_sq, &forest, opts);
    Ok(DecompositionResult { n, remainder, forest, certificate })
}

/// Trees below the `<`-maximal witnesses of the heavy quartiles. A witness `B`
/// heads up to two trees: members with `ω_{B_1} ⊆ ω_{Q_1}` form a 1-tree and
/// the rest a 2-tree.
fn witness_forest(work: &mut Vec<Quartile>, heavy: &[Bitile], coll: &TileCollection) -> Vec<Tree> {
    let mut tops: Vec<Bitile> =
        heavy.iter().filter(|b| !heavy.iter().any(|c| strictly_below(*b, c))).copied().collect();
    tops.sort();
    tops.dedup();
    let mut forest = Vec::new();
    for b in tops {
        let members: Vec<Quartile> = work.iter().filter(|q| below_or_equal(&q.p12(), &b)).copied().collect();
        remove(work, &members);
        let w1 = b.subtile(1).freq();
        let (first, second): (Vec<Quartile>, Vec<Quartile>) =
            members.into_iter().partition(|q| w1.subset_of(&q.subtile(1).freq()));
        for (j, group) in [(1, first), (2, second)] {
            if group.is_empty() {
                continue;
            }
            forest.extend(trees_under(&b, j, group, coll));
        }
    }
    forest
}

fn trees_under(b: &Bitile, j: usize, group: Vec<Quartile>, coll: &TileCollection) -> Vec<Tree> {
    let top = if b.l() % 2 == 0 {
        Some(Quartile::new(b.k(), b.n(), b.l() / 2))
    } else {
        minimal_top(&group, j, coll.grid())
    };
    match top {
        Some(top) => vec![Tree::new(top, j, group).expect("members lie below the witness")],
        None => group.into_iter().map(|q| Tree { top: q, tree_type: j, members: vec![q] }).collect(),
    }
}

fn max_sq(terms: &[(Quartile, QuadExt, Option<Bitile>)]) -> QuadExt {
    terms.iter().fold(QuadExt::zero(), |a, (_, v, _)| a.max(v.clone())).square()
}

fn heavy_witnesses(terms: &[(Quartile, QuadExt, Option<Bitile>)], threshold: &QuadExt) -> Vec<Bitile> {
    terms.iter().filter(|(_, v, _)| v.square() > *threshold).filter_map(|(_, _, b)| *b).collect()
}

fn pool<'a>(opts: &DecomposeOptions, full: &'a TileCollection) -> Witnesses<'a> {
    Witnesses::from_domain(opts.witnesses, full)
}

/// Selection for the Carleson size of `(⟨G χ_{N ∈ ω_{Q_2}}, φ_{Q_1}⟩)` on
/// `q_sub ⊆ q_full`.
pub fn decomp_bsize(
    q_sub: &TileCollection,
    q_full: &TileCollection,
    g: &StepFunction,
    big_n: &ChoiceFunction,
    n: i32,
    e_sq: &QuadExt,
    opts: &DecomposeOptions,
) -> Result<DecompositionResult> {
    let witnesses = pool(opts, q_full);
    let terms = b_size_terms(g, big_n, q_sub, witnesses)?;
    require(&max_sq(&terms), e_sq, n)?;
    let heavy = heavy_witnesses(&terms, &threshold_sq(e_sq, n + 1));
    let mut work = q_sub.members().to_vec();
    let forest = witness_forest(&mut work, &heavy, q_sub);
    let remainder = q_sub.with_members(work);
    let size_sq = max_sq(&b_size_terms(g, big_n, &remainder, witnesses)?);
    let certificate = certify(n, 1, e_sq, size_sq, &forest, opts);
    Ok(DecompositionResult { n, remainder, forest, certificate })
}

/// Selection for `size'_{Q', P}(f_1, f_3)` on `q_sub ⊆ q_full`.
#[allow(clippy::too_many_arguments)]
pub fn decomp_prime(
    q_sub: &TileCollection,
    q_full: &TileCollection,
    p_coll: &TileCollection,
    f1: &StepFunction,
    f3: &StepFunction,
    big_n: &ChoiceFunction,
    n: i32,
    e_sq: &QuadExt,
    opts: &DecomposeOptions,
) -> Result<DecompositionResult> {
    let witnesses = pool(opts, q_full);
    let terms = size_prime_terms(f1, f3, big_n, q_sub, p_coll, witnesses)?;
    require(&max_sq(&terms), e_sq, n)?;
    let heavy = heavy_witnesses(&terms, &threshold_sq(e_sq, n + 1));
    let mut work = q_sub.members().to_vec();
    let forest = witness_forest(&mut work, &heavy, q_sub);
    let remainder = q_sub.with_members(work);
    let size_sq = max_sq(&size_prime_terms(f1, f3, big_n, &remainder, p_coll, witnesses)?);
    let certificate = certify(n, 1, e_sq, size_sq, &forest, opts);
    Ok(DecompositionResult { n, remainder, forest, certificate })
}

fn below(p: &Quartile, top: &Quartile, i: usize, strict: bool) -> bool {
    if strict {
        strictly_below(&p.subtile(i), &top.subtile(i))
    } else {
        below_or_equal(&p.subtile(i), &top.subtile(i))
    }
}

fn pairwise_disjoint(tiles: &[crate::tiles::Tile]) -> bool {
    tiles.iter().enumerate().all(|(a, s)| tiles[a + 1..].iter().all(|t| s == t || tiles_disjoint(s, t)))
}

/// Selection for `size''_1(g, h)`: repeatedly pick an ambient `Q⁰` and `i ∈ {2, 3}`
/// whose tree `T = {Q : Q_i ≤ Q⁰_i}` obeys `‖F_T‖_1 ≥ 2^{-n-3/2} E |I_{Q⁰}|`,
/// with `Q⁰_i` maximal and then `ξ_{Q⁰}` minimal; remove `T` and the 1-tree
/// of the same top.
pub fn decomp_doubleprime(
    q_sub: &TileCollection,
    p_coll: &TileCollection,
    g: &StepFunction,
    h: &StepFunction,
    n: i32,
    e_sq: &QuadExt,
    opts: &DecomposeOptions,
) -> Result<DecompositionResult> {
    let size = size_doubleprime(g, h, q_sub, p_coll, DoublePrimeMode::MaximalTree)?.value;
    require(&size.square(), e_sq, n)?;
    let terms = DoublePrimeTerms::new(g, h, q_sub, p_coll)?;
    // ‖F_T‖_1² ≥ 2^{-2n-3} E² |I_{Q⁰}|².
    let select = e_sq.scale_pow2(-2 * n - 3);
    let ambient = enumerate_quartiles(q_sub.grid());
    let parts: Vec<Vec<Quartile>> = if opts.parity_split {
        let (even, odd) = q_sub.members().iter().partition(|q| q.k().rem_euclid(2) == 0);
        vec![even, odd]
    } else {
        vec![q_sub.members().to_vec()]
    };
    let mut forest = Vec::new();
    let mut remainder = Vec::new();
    let mut disjoint_ok = true;
    let mut pass = |mut work: Vec<Quartile>, forest: &mut Vec<Tree>| -> Vec<Quartile> {
        let mut selected: [Vec<Tree>; 2] = [Vec::new(), Vec::new()];
        loop {
            let mut progress = false;
            for i in [2, 3] {
                loop {
                    let cands: Vec<Quartile> = ambient
                        .iter()
                        .filter(|top| {
                            let members: Vec<Quartile> =
                                work.iter().filter(|q| below(q, top, i, opts.strict_trees)).copied().collect();
                            if members.is_empty() {
                                return false;
                            }
                            let l1 = terms.evaluate(&members).0.l1_exact();
                            l1.square() >= select.scale_pow2(-2 * top.k())
                        })
                        .copied()
                        .collect();
                    let Some(top) = extremal_top(&maximal_tops(&cands, i), true) else { break };
                    let members: Vec<Quartile> = work.iter().filter(|q| below(q, &top, i, opts.strict_trees)).copied().collect();
                    remove(&mut work, &members);
                    selected[i - 2].push(Tree { top, tree_type: i, members });
                    let partner: Vec<Quartile> = work.iter().filter(|q| below(q, &top, 1, opts.strict_trees)).copied().collect();
                    remove(&mut work, &partner);
                    if !partner.is_empty() {
                        forest.push(Tree { top, tree_type: 1, members: partner });
                    }
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        for family in &selected {
            let q1: Vec<_> = family.iter().flat_map(|t| t.members.iter().map(|q| q.subtile(1))).collect();
            let tildes: Vec<Vec<Quartile>> = family.iter().map(|t| tilde_tree(&t.members, p_coll)).collect();
            let tildes_disjoint =
                tildes.iter().enumerate().all(|(a, s)| tildes[a + 1..].iter().all(|t| s.iter().all(|p| !t.contains(p))));
            let p1: Vec<_> = tildes.iter().flatten().map(|p| p.subtile(1)).collect();
            disjoint_ok &= pairwise_disjoint(&q1) && tildes_disjoint && pairwise_disjoint(&p1);
        }
        forest.extend(selected.into_iter().flatten());
        work
    };
    for work in parts {
        remainder.extend(pass(work, &mut forest));
    }
    // `F_T` of a tree meeting both parities is not the sum of its halves, so
    // a final pass over the merged remainder removes any tree still heavy.
    if opts.parity_split {
        remainder = pass(remainder, &mut forest);
    }
    let remainder = q_sub.with_members(remainder);
    let size = size_doubleprime(g, h, &remainder, p_coll, DoublePrimeMode::MaximalTree)?.value;
    let mut certificate = certify(n, 2, e_sq, size.square(), &forest, opts);
    certificate.disjoint_ok = Some(disjoint_ok);
    if remainder.len() <= crate::treenorms::EXHAUSTIVE_LIMIT {
        let exact = size_doubleprime(g, h, &remainder, p_coll, DoublePrimeMode::Exhaustive)?.value;
        certificate.exhaustive_size_ok = Some(exact.square() <= certificate.threshold_sq);
    }
    Ok(DecompositionResult { n, remainder, forest, certificate })
}

/// The functional whose size is being decomposed, with its inputs.
#[derive(Clone, Copy, Debug)]
pub enum Functional<'a> {
    Size { coll: &'a TileCollection, j: usize, f: &'a StepFunction },
    BSize { coll: &'a TileCollection, g: &'a StepFunction, n: &'a ChoiceFunction },
    Prime { q_coll: &'a TileCollection, p_coll: &'a TileCollection, f1: &'a StepFunction, f3: &'a StepFunction, n: &'a ChoiceFunction },
    DoublePrime { q_coll: &'a TileCollection, p_coll: &'a TileCollection, g: &'a StepFunction, h: &'a StepFunction },
}

impl<'a> Functional<'a> {
    pub fn collection(&self) -> &'a TileCollection {
        match *self {
            Functional::Size { coll, .. } | Functional::BSize { coll, .. } => coll,
            Functional::Prime { q_coll, .. } | Functional::DoublePrime { q_coll, .. } => q_coll,
        }
    }

    /// `κ` in `Σ |I_T| ≲ 2^{κn}`.
    pub fn kappa(&self) -> i32 {
        match self {
            Functional::Size { .. } | Functional::DoublePrime { .. } => 2,
            Functional::BSize { .. } | Functional::Prime { .. } => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Size { .. } => "size",
            Functional::BSize { .. } => "bsize",
            Functional::Prime { .. } => "prime",
            Functional::DoublePrime { .. } => "doubleprime",
        }
    }

    /// `E²`, the squared energy of the whole collection.
    pub fn reference_sq(&self) -> Result<QuadExt> {
        Ok(match *self {
            Functional::Size { coll, j, f } => energy_scalar(&analyze(f, coll, &[j])?, coll, j)?,
            Functional::BSize { coll, g, n } => b_energy(g, n, coll)?.square(),
            Functional::Prime { q_coll, p_coll, f1, f3, n } => energy_prime(f1, f3, n, q_coll, p_coll)?.square(),
            Functional::DoublePrime { q_coll, p_coll, g, h } => {
                energy_doubleprime(g, h, q_coll, p_coll, DoublePrimeMode::Auto)?.value
            }
        })
    }

    /// Squared size of a subcollection, measured the way the selection
    /// certifies it.
    pub fn size_sq(&self, sub: &TileCollection, opts: &DecomposeOptions) -> Result<QuadExt> {
        Ok(match *self {
            Functional::Size { j, f, .. } => size_scalar(&analyze(f, sub, &[j])?, sub, j)?,
            Functional::BSize { coll, g, n } => max_sq(&b_size_terms(g, n, sub, pool(opts, coll))?),
            Functional::Prime { q_coll, p_coll, f1, f3, n } => {
                max_sq(&size_prime_terms(f1, f3, n, sub, p_coll, pool(opts, q_coll))?)
            }
            Functional::DoublePrime { p_coll, g, h, .. } => {
                size_doubleprime(g, h, sub, p_coll, DoublePrimeMode::MaximalTree)?.value.square()
            }
        })
    }

    pub fn decompose(&self, sub: &TileCollection, n: i32, e_sq: &QuadExt, opts: &DecomposeOptions) -> Result<DecompositionResult> {
        match *self {
            Functional::Size { j, f, .. } => decomp_size(sub, j, f, n, e_sq, opts),
            Functional::BSize { coll, g, n: big_n } => decomp_bsize(sub, coll, g, big_n, n, e_sq, opts),
            Functional::Prime { q_coll, p_coll, f1, f3, n: big_n } => {
                decomp_prime(sub, q_coll, p_coll, f1, f3, big_n, n, e_sq, opts)
            }
            Functional::DoublePrime { p_coll, g, h, .. } => decomp_doubleprime(sub, p_coll, g, h, n, e_sq, opts),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionLevel {
    /// `None` for the quartiles on which the size vanishes identically.
    pub n: Option<i32>,
    pub members: TileCollection,
    pub forest: Vec<Tree>,
    pub size_sq: QuadExt,
    /// `min(2^{-2n} E², size(P)²)`.
    pub bound_sq: QuadExt,
    pub size_ok: bool,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionResult {
    pub functional: &'static str,
    pub reference_sq: QuadExt,
    pub input_size_sq: QuadExt,
    pub levels: Vec<PartitionLevel>,
}

impl PartitionResult {
    /// The levels are disjoint and their union is `input`.
    pub fn partitions(&self, input: &TileCollection) -> bool {
        let mut all: Vec<Quartile> = self.levels.iter().flat_map(|l| l.members.iter().copied()).collect();
        let total = all.len();
        all.sort();
        all.dedup();
        all.len() == total && all == input.members()
    }

    pub fn certified(&self) -> bool {
        self.levels.iter().all(|l| l.size_ok && l.certificate.as_ref().is_none_or(Certificate::holds))
    }
}

/// Smallest `n` with `s² ≤ 2^{-2n} E²`.
fn first_level(s_sq: &QuadExt, e_sq: &QuadExt) -> i32 {
    let mut n = ((e_sq.to_f64() / s_sq.to_f64()).log2() / 2.0).floor() as i32;
    while *s_sq > threshold_sq(e_sq, n) {
        n -= 1;
    }
    while *s_sq <= threshold_sq(e_sq, n + 1) {
        n += 1;
    }
    n
}

/// Iterates the selection from the first admissible level upward until the
/// collection is exhausted.
pub fn full_partition(which: &Functional, opts: &DecomposeOptions) -> Result<PartitionResult> {
    let input = which.collection();
    let e_sq = which.reference_sq()?;
    let input_size_sq = which.size_sq(input, opts)?;
    let mut result = PartitionResult { functional: which.name(), reference_sq: e_sq.clone(), input_size_sq, levels: Vec::new() };
    let mut work = input.clone();
    if work.is_empty() {
        return Ok(result);
    }
    let mut n = None;
    loop {
        let s_sq = which.size_sq(&work, opts)?;
        if s_sq.is_zero() {
            result.levels.push(PartitionLevel {
                n: None,
                members: work,
                forest: Vec::new(),
                size_sq: QuadExt::zero(),
                bound_sq: QuadExt::zero(),
                size_ok: true,
                certificate: None,
            });
            return Ok(result);
        }
        if e_sq.is_zero() {
            return Err(Error::Precondition("positive size with zero energy".into()));
        }
        let level = *n.get_or_insert_with(|| first_level(&s_sq, &e_sq));
        let dec = which.decompose(&work, level, &e_sq, opts)?;
        if !dec.forest.is_empty() {
            let members = input.with_members(dec.selected());
            let size_sq = which.size_sq(&members, opts)?;
            let bound_sq = threshold_sq(&e_sq, level).min(result.input_size_sq.clone());
            result.levels.push(PartitionLevel {
                n: Some(level),
                size_ok: size_sq <= bound_sq,
                members,
                forest: dec.forest,
                size_sq,
                bound_sq,
                certificate: Some(dec.certificate),
            });
        }
        work = dec.remainder;
        if work.is_empty() {
            return Ok(result);
        }
        n = Some(level + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::AmbientGrid;

    fn grid(m: u32) -> AmbientGrid {
        AmbientGrid::new(m).unwrap()
    }

    #[test]
    fn below_threshold_keeps_everything() {
        let g = grid(3);
        let q = Quartile::new(0, 0, 0);
        let coll = TileCollection::new(&g, vec![q]).unwrap();
        let f = StepFunction::indicator(3, &q.interval()).unwrap();
        let seq = analyze(&f, &coll, &[1]).unwrap();
        let s_sq = size_scalar(&seq, &coll, 1).unwrap();
        // E chosen so that size = 2^{-1} E: nothing exceeds 2^{-2} E.
        let e_sq = s_sq.scale_pow2(2);
        let res = decomp_size(&coll, 1, &f, 0, &e_sq, &DecomposeOptions::default()).unwrap();
        assert!(res.forest.is_empty());
        assert_eq!(res.remainder, coll);
        assert!(res.certificate.holds());
    }

    #[test]
    fn single_violator_becomes_singleton_tree() {
        let g = grid(3);
        let q = Quartile::new(0, 0, 0);
        let coll = TileCollection::new(&g, vec![q]).unwrap();
        let f = StepFunction::indicator(3, &q.interval()).unwrap();
        let seq = analyze(&f, &coll, &[1]).unwrap();
        let e_sq = size_scalar(&seq, &coll, 1).unwrap();
        let res = decomp_size(&coll, 1, &f, 0, &e_sq, &DecomposeOptions::default()).unwrap();
        assert!(res.remainder.is_empty());
        assert_eq!(res.selected(), vec![q]);
        assert!(res.certificate.holds());
    }

    #[test]
    fn precondition_enforced() {
        let g = grid(3);
        let q = Quartile::new(0, 0, 0);
        let coll = TileCollection::new(&g, vec![q]).unwrap();
        let f = StepFunction::indicator(3, &q.interval()).unwrap();
        let e_sq = QuadExt::one().scale_pow2(-20);
        assert!(matches!(decomp_size(&coll, 1, &f, 0, &e_sq, &DecomposeOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_partition() {
        let g = grid(2);
        let coll = TileCollection::empty(&g);
        let f = StepFunction::zero(2);
        let res = full_partition(&Functional::Size { coll: &coll, j: 1, f: &f }, &DecomposeOptions::default()).unwrap();
        assert!(res.levels.is_empty());
        assert!(res.partitions(&coll));
    }

    #[test]
    fn zero_energy_is_one_trivial_level() {
        let g = grid(2);
        let coll = TileCollection::new(&g, enumerate_quartiles(&g)).unwrap();
        let f = StepFunction::zero(2);
        let res = full_partition(&Functional::Size { coll: &coll, j: 2, f: &f }, &DecomposeOptions::default()).unwrap();
        assert_eq!(res.levels.len(), 1);
        assert_eq!(res.levels[0].n, None);
        assert!(res.partitions(&coll) && res.certified());
    }
}
