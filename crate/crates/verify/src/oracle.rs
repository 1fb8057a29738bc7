//! Brute-force evaluators used as test oracles.
//!
//! Geometry and wave packets are recomputed here from the raw `(k, n, l)`
//! labels, independently of the tile and packet modules; every sup over trees
//! or disjoint families is an explicit enumeration of subsets. Only exact
//! number and step-function arithmetic is shared with the fast code.

use wtf_core::dyadic::{ChoiceFunction, StepFunction};
use wtf_core::num::{DyadicRational, QuadExt};
use wtf_core::tiles::{Quartile, Rect, Tile};

/// Largest instance the subset enumerations accept.
pub const MAX_ITEMS: usize = 16;

/// Axis-parallel rectangle with endpoints in units of `2^{-M}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub x0: i64,
    pub x1: i64,
    pub w0: i64,
    pub w1: i64,
}

impl Block {
    /// The rectangle `[n 2^{-k}, (n+1) 2^{-k}) × [w0 2^k, w1 2^k)`.
    fn new(m: u32, k: i32, n: i64, w0: i64, w1: i64) -> Block {
        let m = m as i32;
        let space = 1i64 << (m - k);
        let freq = 1i64 << (m + k);
        Block { x0: n * space, x1: (n + 1) * space, w0: w0 * freq, w1: w1 * freq }
    }

    /// `I_a ⊆ I_b` and `ω_b ⊆ ω_a`.
    pub fn le(&self, b: &Block) -> bool {
        b.x0 <= self.x0 && self.x1 <= b.x1 && self.w0 <= b.w0 && b.w1 <= self.w1
    }

    pub fn lt(&self, b: &Block) -> bool {
        self.le(b) && self != b
    }

    pub fn disjoint(&self, b: &Block) -> bool {
        self.x1 <= b.x0 || b.x1 <= self.x0 || self.w1 <= b.w0 || b.w1 <= self.w0
    }

    /// `|I|` as an exponent of 2.
    pub fn length_log2(&self, m: u32) -> i32 {
        (self.x1 - self.x0).trailing_zeros() as i32 - m as i32
    }
}

/// Quartile part: a subtile `1..=3`, or `12` for the sub-bitile `P_{12}`.
pub fn part(m: u32, q: &Quartile, which: usize) -> Block {
    let (k, n, l) = (q.k(), q.n(), q.l());
    match which {
        1..=3 => {
            let j = which as i64;
            Block::new(m, k, n, 4 * l + j - 1, 4 * l + j)
        }
        12 => Block::new(m, k, n, 4 * l, 4 * l + 2),
        _ => panic!("no quartile part {which}"),
    }
}

/// The rectangle of a tile.
pub fn tile_block(m: u32, t: &Tile) -> Block {
    Block::new(m, t.k(), t.n(), t.l(), t.l() + 1)
}

/// All quartiles with `I ⊆ [0, 2^M)` and `ω ⊆ [0, 2^M)`.
pub fn all_quartiles(m: u32) -> Vec<Quartile> {
    let mi = m as i32;
    let mut out = Vec::new();
    for k in -mi..=mi - 2 {
        for n in 0..1i64 << (mi + k) {
            for l in 0..1i64 << (mi - k - 2) {
                out.push(Quartile::new(k, n, l));
            }
        }
    }
    out
}

/// `W_l` on `[0, 1)` at the dyadic point `u 2^{-d}`: the recursion
/// `W_{2l+e}(x) = W_l(2x) ± W_l(2x-1)` pairs bit `i` of `l` with binary digit `i+1` of `x`.
fn walsh_sign(l: i64, u: i64, d: u32) -> i8 {
    let mut s = 0;
    for i in 0..d {
        if (l >> i) & 1 == 1 && (u >> (d - 1 - i)) & 1 == 1 {
            s ^= 1;
        }
    }
    if s == 0 {
        1
    } else {
        -1
    }
}

/// `φ_P(x) = 2^{k/2} W_l(2^k x - n)` sampled on fine cells.
pub fn packet(m: u32, tile: &Tile) -> StepFunction {
    let (k, n, l) = (tile.k(), tile.n(), tile.l());
    let d = (m as i32 - k) as u32;
    let start = n << d;
    let amp = QuadExt::sqrt2_pow(k);
    StepFunction::from_fn(m, |c| {
        let c = c as i64;
        if c < start || c >= start + (1 << d) {
            return QuadExt::zero();
        }
        if walsh_sign(l, c - start, d) > 0 {
            amp.clone()
        } else {
            -&amp
        }
    })
}

pub fn coefficient(f: &StepFunction, tile: &Tile) -> QuadExt {
    f.inner_product(&packet(f.m(), tile)).expect("same grid")
}

/// `χ_{N ∈ ω}` for `ω = [w0, w1) 2^{-M}`.
pub fn choice_mask(n: &ChoiceFunction, b: &Block) -> StepFunction {
    let m = n.m();
    let lo = DyadicRational::new(b.w0, m as i32);
    let hi = DyadicRational::new(b.w1, m as i32);
    StepFunction::from_fn(m, |c| {
        let v = n.value(c);
        if lo <= *v && *v < hi {
            QuadExt::one()
        } else {
            QuadExt::zero()
        }
    })
}

/// `χ_I` for the space side of `b`.
pub fn space_mask(m: u32, b: &Block) -> StepFunction {
    StepFunction::from_fn(m, |c| {
        let c = c as i64;
        if b.x0 <= c && c < b.x1 {
            QuadExt::one()
        } else {
            QuadExt::zero()
        }
    })
}

/// `∫_{I_b} |g| χ_{N ∈ ω_b}`.
pub fn masked_integral(g: &StepFunction, n: &ChoiceFunction, b: &Block) -> QuadExt {
    let w = g.abs().mul(&choice_mask(n, b)).expect("same grid").mul(&space_mask(g.m(), b)).expect("same grid");
    w.integrate(None).expect("whole line")
}

/// Pairwise conflict masks: bit `b` of `out[a]` is set when `a` and `b` must not co-occur.
fn conflicts(blocks: &[Block]) -> Vec<u32> {
    assert!(blocks.len() <= MAX_ITEMS, "oracle instance too large");
    (0..blocks.len())
        .map(|a| (0..blocks.len()).filter(|&b| b != a && !blocks[a].disjoint(&blocks[b])).fold(0, |acc, b| acc | 1 << b))
        .collect()
}

fn members(mask: u32, len: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |&t| mask >> t & 1 == 1)
}

/// Largest total weight of a pairwise disjoint subfamily, by enumerating subsets.
pub fn disjoint_family_max(blocks: &[Block], weights: &[QuadExt]) -> QuadExt {
    let conflict = conflicts(blocks);
    let mut best = QuadExt::zero();
    for mask in 1u32..1 << blocks.len() {
        if members(mask, blocks.len()).any(|t| conflict[t] & mask != 0) {
            continue;
        }
        best = best.max(members(mask, blocks.len()).map(|t| weights[t].clone()).sum());
    }
    best
}

/// Largest total weight of a pairwise incomparable subfamily of arbitrary blocks.
pub fn antichain_max(blocks: &[Block], weights: &[QuadExt]) -> QuadExt {
    assert!(blocks.len() <= MAX_ITEMS, "oracle instance too large");
    let mut best = QuadExt::zero();
    'subsets: for mask in 1u32..1 << blocks.len() {
        let chosen: Vec<usize> = members(mask, blocks.len()).collect();
        for (s, &a) in chosen.iter().enumerate() {
            for &b in &chosen[s + 1..] {
                if blocks[a].le(&blocks[b]) || blocks[b].le(&blocks[a]) {
                    continue 'subsets;
                }
            }
        }
        best = best.max(chosen.iter().map(|&t| weights[t].clone()).sum());
    }
    best
}

/// Tree tops over which the sizes range.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Tops {
    Ambient,
    Collection,
}

/// Per-`(top, i)` membership masks: quartiles whose `i`-subtile lies below the top's.
fn tree_masks(m: u32, coll: &[Quartile], tops: Tops, indices: &[usize]) -> Vec<(u32, i32)> {
    let candidates = match tops {
        Tops::Ambient => all_quartiles(m),
        Tops::Collection => coll.to_vec(),
    };
    let mut out = Vec::new();
    for top in &candidates {
        for &i in indices {
            let t = part(m, top, i);
            let mask = coll.iter().enumerate().filter(|(_, q)| part(m, q, i).le(&t)).fold(0u32, |acc, (s, _)| acc | 1 << s);
            out.push((mask, top.k()));
        }
    }
    out
}

/// For every nonempty subset that is an `i`-tree for some admissible `i`, the
/// largest `k` of a top over it (smallest `|I_T|`).
fn tree_subsets(m: u32, coll: &[Quartile], tops: Tops, indices: &[usize]) -> Vec<(u32, i32)> {
    assert!(coll.len() <= MAX_ITEMS, "oracle instance too large");
    let masks = tree_masks(m, coll, tops, indices);
    let mut out = Vec::new();
    for s in 1u32..1 << coll.len() {
        if let Some(k) = masks.iter().filter(|(mask, _)| s & !mask == 0).map(|&(_, k)| k).max() {
            out.push((s, k));
        }
    }
    out
}

fn other_indices(j: usize) -> Vec<usize> {
    (1..=3).filter(|&i| i != j).collect()
}

/// `size_j²`: the sup over subsets that are trees of `|I_T|^{-1} Σ |a_{P_j}|²`.
pub fn size_sq(m: u32, coll: &[Quartile], coeffs: &[QuadExt], j: usize, tops: Tops) -> QuadExt {
    let sq: Vec<QuadExt> = coeffs.iter().map(QuadExt::square).collect();
    tree_subsets(m, coll, tops, &other_indices(j))
        .into_iter()
        .map(|(s, k)| members(s, coll.len()).map(|t| sq[t].clone()).sum::<QuadExt>().scale_pow2(k))
        .fold(QuadExt::zero(), QuadExt::max)
}

/// `energy_j²`: the sup over families with disjoint `P_j` of `Σ |a_{P_j}|²`.
pub fn energy_sq(m: u32, coll: &[Quartile], coeffs: &[QuadExt], j: usize) -> QuadExt {
    let blocks: Vec<Block> = coll.iter().map(|q| part(m, q, j)).collect();
    let sq: Vec<QuadExt> = coeffs.iter().map(QuadExt::square).collect();
    disjoint_family_max(&blocks, &sq)
}

/// `⟨f, φ_{P_j}⟩` for every member.
pub fn coefficients(f: &StepFunction, coll: &[Quartile], j: usize) -> Vec<QuadExt> {
    coll.iter().map(|q| coefficient(f, &q.subtile(j))).collect()
}

/// Quartiles `Q'` whose sub-bitile lies strictly above `Q_{12}`.
fn witnesses(m: u32, q: &Quartile, pool: &[Quartile]) -> Vec<Block> {
    let b = part(m, q, 12);
    pool.iter().map(|w| part(m, w, 12)).filter(|w| b.lt(w)).collect()
}

fn pool(m: u32, coll: &[Quartile], tops: Tops) -> Vec<Quartile> {
    match tops {
        Tops::Ambient => all_quartiles(m),
        Tops::Collection => coll.to_vec(),
    }
}

/// `|I_b|^{-1} ∫_{I_b} |g| χ_{N ∈ ω_b}`.
fn witness_average(g: &StepFunction, n: &ChoiceFunction, b: &Block) -> QuadExt {
    masked_integral(g, n, b).scale_pow2(-b.length_log2(g.m()))
}

/// b-size: every member forms a tree, so the sup runs over members and their witnesses.
pub fn b_size(g: &StepFunction, n: &ChoiceFunction, coll: &[Quartile], tops: Tops) -> QuadExt {
    let m = g.m();
    let pool = pool(m, coll, tops);
    let mut best = QuadExt::zero();
    for q in coll {
        for w in witnesses(m, q, &pool) {
            best = best.max(witness_average(g, n, &w));
        }
    }
    best
}

/// b-energy: disjoint sub-bitiles, weights `∫_{I_P} |G| χ_{N ∈ ω_{P_{12}}}`.
pub fn b_energy(g: &StepFunction, n: &ChoiceFunction, coll: &[Quartile]) -> QuadExt {
    let m = g.m();
    let blocks: Vec<Block> = coll.iter().map(|q| part(m, q, 12)).collect();
    let weights: Vec<QuadExt> = blocks.iter().map(|b| masked_integral(g, n, b)).collect();
    disjoint_family_max(&blocks, &weights)
}

/// `C^c(f_1) = Σ_{P : ω_{Q'_1} ⊆ ω_{P_2}} ⟨f_1, φ_{P_1}⟩ φ_{P_1} χ_{N ∈ ω_{P_2}}`
/// for the witness sub-bitile `b = Q'_{12}` (its lower half is `ω_{Q'_1}`).
pub fn c_complement(f1: &StepFunction, n: &ChoiceFunction, b: &Block, p_coll: &[Quartile]) -> StepFunction {
    let m = f1.m();
    let (w0, w1) = (b.w0, b.w0 + (b.w1 - b.w0) / 2);
    let mut out = StepFunction::zero(m);
    for p in p_coll {
        let p2 = part(m, p, 2);
        if p2.w0 <= w0 && w1 <= p2.w1 {
            let phi = packet(m, &p.subtile(1));
            let a = f1.inner_product(&phi).expect("same grid");
            let term = phi.scale(&a).mul(&choice_mask(n, &p2)).expect("same grid");
            out = out.add(&term).expect("same grid");
        }
    }
    out
}

fn prime_field(f1: &StepFunction, f3: &StepFunction, n: &ChoiceFunction, b: &Block, p_coll: &[Quartile]) -> StepFunction {
    c_complement(f1, n, b, p_coll).mul(f3).expect("same grid")
}

/// `size'(f_1, f_3)` by direct evaluation of every witness average.
pub fn size_prime(
    f1: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
    q_coll: &[Quartile],
    p_coll: &[Quartile],
    tops: Tops,
) -> QuadExt {
    let m = f1.m();
    let pool = pool(m, q_coll, tops);
    let mut best = QuadExt::zero();
    for q in q_coll {
        for w in witnesses(m, q, &pool) {
            best = best.max(witness_average(&prime_field(f1, f3, n, &w, p_coll), n, &w));
        }
    }
    best
}

/// `energy'(f_1, f_3)` over families of `Q` with disjoint sub-bitiles.
pub fn energy_prime(f1: &StepFunction, f3: &StepFunction, n: &ChoiceFunction, q_coll: &[Quartile], p_coll: &[Quartile]) -> QuadExt {
    let m = f1.m();
    let blocks: Vec<Block> = q_coll.iter().map(|q| part(m, q, 12)).collect();
    let weights: Vec<QuadExt> = blocks.iter().map(|b| masked_integral(&prime_field(f1, f3, n, b, p_coll), n, b)).collect();
    disjoint_family_max(&blocks, &weights)
}

/// `Σ_{Q ∈ T} ⟨g, φ_{Q_1}⟩ φ_{Q_1} Σ_{P ∈ T̃, ω_{Q_1} ⊆ ω_{P_2}} ⟨h, φ_{P_1}⟩ φ_{P_1}` for
/// every tree `T` of `Q`, with `T̃` as a bit mask over `P`.
struct DoublePrimeTrees {
    trees: Vec<(u32, i32, StepFunction, Vec<bool>)>,
}

impl DoublePrimeTrees {
    fn new(g: &StepFunction, h: &StepFunction, q_coll: &[Quartile], p_coll: &[Quartile]) -> Self {
        let m = g.m();
        let qa: Vec<StepFunction> = q_coll
            .iter()
            .map(|q| {
                let phi = packet(m, &q.subtile(1));
                phi.scale(&g.inner_product(&phi).expect("same grid"))
            })
            .collect();
        let pa: Vec<StepFunction> = p_coll
            .iter()
            .map(|p| {
                let phi = packet(m, &p.subtile(1));
                phi.scale(&h.inner_product(&phi).expect("same grid"))
            })
            .collect();
        let mut pair: Vec<Vec<Option<StepFunction>>> = Vec::new();
        for (t, q) in q_coll.iter().enumerate() {
            let q1 = part(m, q, 1);
            pair.push(
                p_coll
                    .iter()
                    .enumerate()
                    .map(|(s, p)| {
                        let p2 = part(m, p, 2);
                        (p2.w0 <= q1.w0 && q1.w1 <= p2.w1).then(|| qa[t].mul(&pa[s]).expect("same grid"))
                    })
                    .collect(),
            );
        }
        let mut trees = Vec::new();
        for (s, k) in tree_subsets(m, q_coll, Tops::Ambient, &[2, 3]) {
            let chosen: Vec<usize> = members(s, q_coll.len()).collect();
            let tilde: Vec<bool> = p_coll
                .iter()
                .map(|p| {
                    let p2 = part(m, p, 2);
                    chosen.iter().any(|&t| part(m, &q_coll[t], 2).le(&p2)) && chosen.iter().any(|&t| p2.le(&part(m, &q_coll[t], 2)))
                })
                .collect();
            let mut f = StepFunction::zero(m);
            for &t in &chosen {
                for (u, term) in pair[t].iter().enumerate() {
                    if let (true, Some(term)) = (tilde[u], term) {
                        f = f.add(term).expect("same grid");
                    }
                }
            }
            trees.push((s, k, f, tilde));
        }
        DoublePrimeTrees { trees }
    }
}

/// `size''_1(g, h)`.
pub fn size_doubleprime(g: &StepFunction, h: &StepFunction, q_coll: &[Quartile], p_coll: &[Quartile]) -> QuadExt {
    DoublePrimeTrees::new(g, h, q_coll, p_coll)
        .trees
        .iter()
        .map(|(_, k, f, _)| f.l1_exact().scale_pow2(*k))
        .fold(QuadExt::zero(), QuadExt::max)
}

/// `energy''_1(g, h)²`: families of member-disjoint trees with disjoint `T̃`,
/// enumerated by assigning each quartile in turn to no tree or to a tree it
/// is the first member of.
pub fn energy_doubleprime_sq(g: &StepFunction, h: &StepFunction, q_coll: &[Quartile], p_coll: &[Quartile]) -> QuadExt {
    let trees: Vec<(u32, QuadExt, Vec<bool>)> = DoublePrimeTrees::new(g, h, q_coll, p_coll)
        .trees
        .into_iter()
        .map(|(s, _, f, tilde)| (s, f.l2_squared_exact(), tilde))
        .filter(|(_, w, _)| !w.is_zero())
        .collect();
    let mut by_first: Vec<Vec<usize>> = vec![Vec::new(); q_coll.len()];
    for (t, (s, _, _)) in trees.iter().enumerate() {
        by_first[s.trailing_zeros() as usize].push(t);
    }
    fn search(
        at: usize,
        used: u32,
        tilde_used: &mut Vec<bool>,
        trees: &[(u32, QuadExt, Vec<bool>)],
        by_first: &[Vec<usize>],
    ) -> QuadExt {
        if at == by_first.len() {
            return QuadExt::zero();
        }
        let mut best = search(at + 1, used, tilde_used, trees, by_first);
        if used >> at & 1 == 1 {
            return best;
        }
        for &t in &by_first[at] {
            let (s, w, tilde) = &trees[t];
            if s & used != 0 || tilde.iter().zip(tilde_used.iter()).any(|(a, b)| *a && *b) {
                continue;
            }
            let marked: Vec<usize> = (0..tilde.len()).filter(|&u| tilde[u]).collect();
            for &u in &marked {
                tilde_used[u] = true;
            }
            let v = w + &search(at + 1, used | s, tilde_used, trees, by_first);
            for &u in &marked {
                tilde_used[u] = false;
            }
            best = best.max(v);
        }
        best
    }
    search(0, 0, &mut vec![false; p_coll.len()], &trees, &by_first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use wtf_core::dyadic::AmbientGrid;
    use wtf_core::tiles::enumerate_quartiles;
    use wtf_core::wavepacket::wave_packet;

    #[test]
    fn quartile_count_matches_grid() {
        for m in 2..=4 {
            let g = AmbientGrid::new(m).unwrap();
            let mut a = all_quartiles(m);
            let mut b = enumerate_quartiles(&g);
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
        assert_eq!(all_quartiles(3).len(), 80);
    }

    #[test]
    fn packets_agree_with_the_library() {
        let m = 3;
        let g = AmbientGrid::new(m).unwrap();
        for q in all_quartiles(m) {
            for j in 1..=3 {
                let t = q.subtile(j);
                assert_eq!(packet(m, &t), wave_packet(&g, &t).unwrap(), "{t:?}");
            }
        }
    }

    #[test]
    fn first_walsh_functions() {
        // Signs on the four quarters of [0, 1).
        let w1: Vec<i8> = (0..4).map(|u| walsh_sign(1, u, 2)).collect();
        let w2: Vec<i8> = (0..4).map(|u| walsh_sign(2, u, 2)).collect();
        let w3: Vec<i8> = (0..4).map(|u| walsh_sign(3, u, 2)).collect();
        assert_eq!(w1, vec![1, 1, -1, -1]);
        assert_eq!(w2, vec![1, -1, 1, -1]);
        assert_eq!(w3, vec![1, -1, -1, 1]);
    }

    #[test]
    fn blocks_follow_the_order() {
        let m = 3;
        let big = part(m, &Quartile::new(0, 0, 0), 1);
        let small = part(m, &Quartile::new(1, 0, 0), 1);
        // The finer-in-space tile has the wider frequency interval.
        assert!(small.le(&big) && small.lt(&big) && !big.le(&small));
        assert!(!small.disjoint(&big));
        assert!(part(m, &Quartile::new(0, 0, 0), 1).disjoint(&part(m, &Quartile::new(0, 0, 0), 2)));
    }

    #[test]
    fn antichain_of_a_chain_is_its_heaviest_link() {
        let m = 3;
        let chain: Vec<Block> = [0, 1, 2].iter().map(|&k| part(m, &Quartile::new(k, 0, 0), 1)).collect();
        let w = vec![QuadExt::integer(1), QuadExt::integer(5), QuadExt::integer(2)];
        assert_eq!(antichain_max(&chain, &w), QuadExt::integer(5));
    }
}
