//! The Walsh Carleson operator and its adjoint, the Walsh bilinear Hilbert
//! transform, the restricted operators `B_{P,Q}` and `C_{P,Q}`, the
//! bi-Carleson pieces `T'`, `T''`, the trilinear forms, and the reordered
//! coefficients `a³`.
//!
//! Every output is an exact step function; containment conditions such as
//! `ω_{Q_3} ⊆ ω_P` allow equality.

use crate::dyadic::{AmbientGrid, ChoiceFunction, DyadicInterval, StepFunction};
use crate::error::{Error, Result};
use crate::num::{QuadAccumulator, QuadExt};
use crate::tiles::{biest_restriction, BitileCollection, Quartile, Rect, Tile, TileCollection};
use crate::wavepacket::{packet_inner, CoefficientSequence};

fn check(grid: &AmbientGrid, m: u32) -> Result<()> {
    if grid.m() != m {
        return Err(Error::GridMismatch { left: grid.m(), right: m });
    }
    Ok(())
}

fn finish(m: u32, acc: Vec<QuadAccumulator>) -> StepFunction {
    StepFunction::from_values(m, acc.into_iter().map(QuadAccumulator::finish).collect()).expect("grid sized")
}

fn accumulators(grid: &AmbientGrid) -> Vec<QuadAccumulator> {
    vec![QuadAccumulator::default(); grid.cells()]
}

/// `Σ ⟨f, φ_{P_1}⟩ φ_{P_1} χ_{N ∈ ω_2}` over `(P_1, ω_2)` pairs.
fn carleson_terms(grid: &AmbientGrid, terms: &[(Tile, DyadicInterval)], f: &StepFunction, n: &ChoiceFunction) -> StepFunction {
    let mut out = accumulators(grid);
    for (p1, w2) in terms {
        let packet = grid.packets().get(p1);
        let coef = packet.inner(f);
        packet.add_into(&mut out, &coef, |c| n.in_freq(c, w2));
    }
    finish(grid.m(), out)
}

/// `Σ ⟨g χ_{N ∈ ω_2}, φ_{P_1}⟩ φ_{P_1}`.
fn carleson_adjoint_terms(
    grid: &AmbientGrid,
    terms: &[(Tile, DyadicInterval)],
    g: &StepFunction,
    n: &ChoiceFunction,
) -> StepFunction {
    let mut out = accumulators(grid);
    for (p1, w2) in terms {
        let packet = grid.packets().get(p1);
        let coef = packet.inner_masked(g.values(), |c| n.in_freq(c, w2));
        packet.add_into(&mut out, &coef, |_| true);
    }
    finish(grid.m(), out)
}

fn bitile_terms(coll: &BitileCollection) -> Vec<(Tile, DyadicInterval)> {
    coll.iter().map(|b| (b.subtile(1), b.subtile(2).freq())).collect()
}

fn quartile_terms<'a>(qs: impl IntoIterator<Item = &'a Quartile>) -> Vec<(Tile, DyadicInterval)> {
    qs.into_iter().map(|q| (q.subtile(1), q.subtile(2).freq())).collect()
}

/// `C_P(f) = Σ_P ⟨f, φ_{P_1}⟩ φ_{P_1} χ_{N ∈ ω_{P_2}}` over bitiles.
pub fn carleson_apply(bitiles: &BitileCollection, f: &StepFunction, n: &ChoiceFunction) -> Result<StepFunction> {
    check(bitiles.grid(), f.m())?;
    check(bitiles.grid(), n.m())?;
    Ok(carleson_terms(bitiles.grid(), &bitile_terms(bitiles), f, n))
}

/// `C*_P(g) = Σ_P ⟨g χ_{N ∈ ω_{P_2}}, φ_{P_1}⟩ φ_{P_1}` over bitiles.
pub fn carleson_adjoint_apply(bitiles: &BitileCollection, g: &StepFunction, n: &ChoiceFunction) -> Result<StepFunction> {
    check(bitiles.grid(), g.m())?;
    check(bitiles.grid(), n.m())?;
    Ok(carleson_adjoint_terms(bitiles.grid(), &bitile_terms(bitiles), g, n))
}

/// Carleson operator of a quartile collection, i.e. over the sub-bitiles
/// `P_{12}`.
pub fn carleson_quartiles(coll: &TileCollection, f: &StepFunction, n: &ChoiceFunction) -> Result<StepFunction> {
    check(coll.grid(), f.m())?;
    check(coll.grid(), n.m())?;
    Ok(carleson_terms(coll.grid(), &quartile_terms(coll), f, n))
}

/// Adjoint of [`carleson_quartiles`].
pub fn carleson_adjoint_quartiles(coll: &TileCollection, g: &StepFunction, n: &ChoiceFunction) -> Result<StepFunction> {
    check(coll.grid(), g.m())?;
    check(coll.grid(), n.m())?;
    Ok(carleson_adjoint_terms(coll.grid(), &quartile_terms(coll), g, n))
}

fn bht_terms<'a>(grid: &AmbientGrid, qs: impl IntoIterator<Item = &'a Quartile>, f1: &StepFunction, f2: &StepFunction) -> StepFunction {
    let mut out = accumulators(grid);
    for q in qs {
        let a1 = grid.packets().get(&q.subtile(1)).inner(f1);
        if a1.is_zero() {
            continue;
        }
        let a2 = grid.packets().get(&q.subtile(2)).inner(f2);
        let coef = &(&a1 * &a2) * &QuadExt::sqrt2_pow(q.k());
        grid.packets().get(&q.subtile(3)).add_into(&mut out, &coef, |_| true);
    }
    finish(grid.m(), out)
}

/// `B_P(f_1, f_2) = Σ_P |I_P|^{-1/2} ⟨f_1, φ_{P_1}⟩ ⟨f_2, φ_{P_2}⟩ φ_{P_3}`.
pub fn bht_apply(coll: &TileCollection, f1: &StepFunction, f2: &StepFunction) -> Result<StepFunction> {
    check(coll.grid(), f1.m())?;
    check(coll.grid(), f2.m())?;
    Ok(bht_terms(coll.grid(), coll, f1, f2))
}

/// `B_{P,Q}`: the bilinear Hilbert transform over `Q ∈ Q` with `ω_{Q_3} ⊆ ω_P`.
pub fn b_restricted(p: &Tile, q_coll: &TileCollection, f1: &StepFunction, f2: &StepFunction) -> Result<StepFunction> {
    check(q_coll.grid(), f1.m())?;
    check(q_coll.grid(), f2.m())?;
    let w = p.freq();
    Ok(bht_terms(q_coll.grid(), q_coll.iter().filter(|q| q.subtile(3).freq().subset_of(&w)), f1, f2))
}

/// `C_{P,Q}`: the Carleson operator over `Q ∈ Q` with `ω_{Q_1} ⊆ ω_P`.
pub fn c_restricted(p: &Tile, q_coll: &TileCollection, f2: &StepFunction, n: &ChoiceFunction) -> Result<StepFunction> {
    check(q_coll.grid(), f2.m())?;
    check(q_coll.grid(), n.m())?;
    let w = p.freq();
    let terms = quartile_terms(q_coll.iter().filter(|q| q.subtile(1).freq().subset_of(&w)));
    Ok(carleson_terms(q_coll.grid(), &terms, f2, n))
}

/// `C^c_{Q',P}(f_1) = Σ_{P : ω_{Q'_1} ⊆ ω_{P_2}} ⟨f_1, φ_{P_1}⟩ φ_{P_1} χ_{N ∈ ω_{P_2}}`.
pub fn c_complement(
    q_prime: &crate::tiles::Bitile,
    p_coll: &TileCollection,
    f1: &StepFunction,
    n: &ChoiceFunction,
) -> Result<StepFunction> {
    check(p_coll.grid(), f1.m())?;
    check(p_coll.grid(), n.m())?;
    let w = q_prime.subtile(1).freq();
    let terms = quartile_terms(p_coll.iter().filter(|p| w.subset_of(&p.subtile(2).freq())));
    Ok(carleson_terms(p_coll.grid(), &terms, f1, n))
}

/// Per-quartile inner products `⟨f, φ_{Q_j}⟩`, indexed like the collection.
fn coefficients(coll: &TileCollection, f: &StepFunction, j: usize) -> Vec<QuadExt> {
    coll.iter().map(|q| coll.grid().packets().get(&q.subtile(j)).inner(f)).collect()
}

fn check_pair(p_coll: &TileCollection, q_coll: &TileCollection, fs: &[&StepFunction], n: &ChoiceFunction) -> Result<()> {
    check(p_coll.grid(), q_coll.grid().m())?;
    for f in fs {
        check(p_coll.grid(), f.m())?;
    }
    check(p_coll.grid(), n.m())
}

/// `T'_{P,Q}(f_1, f_2) = Σ_P ⟨B_{P_1,Q}(f_1, f_2), φ_{P_1}⟩ φ_{P_1} χ_{N ∈ ω_{P_2}}`.
pub fn t_prime_apply(
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    n: &ChoiceFunction,
) -> Result<StepFunction> {
    check_pair(p_coll, q_coll, &[f1, f2], n)?;
    let grid = p_coll.grid();
    let a1 = coefficients(q_coll, f1, 1);
    let a2 = coefficients(q_coll, f2, 2);
    let weights: Vec<QuadExt> = q_coll
        .iter()
        .enumerate()
        .map(|(t, q)| &(&a1[t] * &a2[t]) * &QuadExt::sqrt2_pow(q.k()))
        .collect();
    let mut out = accumulators(grid);
    for p in p_coll {
        let p1 = p.subtile(1);
        let mut coef = QuadAccumulator::default();
        for (t, q) in q_coll.iter().enumerate() {
            let q3 = q.subtile(3);
            if weights[t].is_zero() || !q3.freq().subset_of(&p1.freq()) {
                continue;
            }
            let ip = packet_inner(grid, &q3, &p1);
            if !ip.is_zero() {
                coef.add(&(&weights[t] * &ip));
            }
        }
        let w2 = p.subtile(2).freq();
        grid.packets().get(&p1).add_into(&mut out, &coef.finish(), |c| n.in_freq(c, &w2));
    }
    Ok(finish(grid.m(), out))
}

/// `T''_{P,Q}(f_1, f_2) = Σ_P ⟨f_1, φ_{P_1}⟩ φ_{P_1} C_{P_2,Q}(f_2) χ_{N ∈ ω_{P_2}}`.
pub fn t_double_prime_apply(
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    n: &ChoiceFunction,
) -> Result<StepFunction> {
    check_pair(p_coll, q_coll, &[f1, f2], n)?;
    let grid = p_coll.grid();
    let b = coefficients(q_coll, f2, 1);
    let mut out = accumulators(grid);
    for p in p_coll {
        let pp = grid.packets().get(&p.subtile(1));
        let a = pp.inner(f1);
        if a.is_zero() {
            continue;
        }
        let w2 = p.subtile(2).freq();
        let ip = p.interval();
        for (t, q) in q_coll.iter().enumerate() {
            if b[t].is_zero() || !q.subtile(1).freq().subset_of(&w2) || !q.interval().intersects(&ip) {
                continue;
            }
            let qp = grid.packets().get(&q.subtile(1));
            let wq2 = q.subtile(2).freq();
            let plus = &(&(&a * &b[t]) * &pp.amplitude) * &qp.amplitude;
            let minus = -&plus;
            // ω_{Q_1} ⊆ ω_{P_2} forces |I_Q| >= |I_P|, so I_P ⊆ I_Q.
            for (c, &s) in pp.cells().zip(&pp.signs) {
                if n.in_freq(c, &w2) && n.in_freq(c, &wq2) {
                    let sign = s * qp.signs[c - qp.start];
                    out[c].add(if sign > 0 { &plus } else { &minus });
                }
            }
        }
    }
    Ok(finish(grid.m(), out))
}

/// `T = T' + T''`.
pub fn t_apply(
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    n: &ChoiceFunction,
) -> Result<StepFunction> {
    t_prime_apply(p_coll, q_coll, f1, f2, n)?.add(&t_double_prime_apply(p_coll, q_coll, f1, f2, n)?)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Form {
    /// `Λ = ∫ T(f_1, f_2) f_3`.
    Lambda,
    /// `Λ' = ∫ T'(f_1, f_2) f_3`.
    LambdaPrime,
    /// `Λ'' = ∫ T''(f_1, f_2) f_3`.
    LambdaDoublePrime,
}

pub fn lambda_form(
    which: Form,
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
) -> Result<QuadExt> {
    let t = match which {
        Form::Lambda => t_apply(p_coll, q_coll, f1, f2, n)?,
        Form::LambdaPrime => t_prime_apply(p_coll, q_coll, f1, f2, n)?,
        Form::LambdaDoublePrime => t_double_prime_apply(p_coll, q_coll, f1, f2, n)?,
    };
    t.inner_product(f3)
}

/// `a³_{Q_3} = Σ_{P : ω_{Q_3} ⊆ ω_{P_1}} ⟨f_3 χ_{N ∈ ω_{P_2}}, φ_{P_1}⟩ ⟨φ_{P_1}, φ_{Q_3}⟩`,
/// stored under subtile index 3.
pub fn a3_coefficients(
    q_coll: &TileCollection,
    p_coll: &TileCollection,
    f3: &StepFunction,
    n: &ChoiceFunction,
) -> Result<CoefficientSequence> {
    check_pair(p_coll, q_coll, &[f3], n)?;
    let grid = p_coll.grid();
    let masked: Vec<QuadExt> = p_coll
        .iter()
        .map(|p| {
            let w2 = p.subtile(2).freq();
            grid.packets().get(&p.subtile(1)).inner_masked(f3.values(), |c| n.in_freq(c, &w2))
        })
        .collect();
    let mut seq = CoefficientSequence::new();
    for q in q_coll {
        let q3 = q.subtile(3);
        let mut acc = QuadAccumulator::default();
        for (s, p) in p_coll.iter().enumerate() {
            let p1 = p.subtile(1);
            if masked[s].is_zero() || !q3.freq().subset_of(&p1.freq()) {
                continue;
            }
            acc.add(&(&masked[s] * &packet_inner(grid, &p1, &q3)));
        }
        seq.insert(*q, 3, acc.finish());
    }
    Ok(seq)
}

/// `Λ'` summed over `Q` as `Σ_Q |I_Q|^{-1/2} a¹_{Q_1} a²_{Q_2} a³_{Q_3}`.
pub fn lambda_prime_reordered(
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
) -> Result<QuadExt> {
    let a3 = a3_coefficients(q_coll, p_coll, f3, n)?;
    let a1 = coefficients(q_coll, f1, 1);
    let a2 = coefficients(q_coll, f2, 2);
    let mut acc = QuadAccumulator::default();
    for (t, q) in q_coll.iter().enumerate() {
        let term = &(&(&a1[t] * &a2[t]) * &a3.get(q, 3)) * &QuadExt::sqrt2_pow(q.k());
        acc.add(&term);
    }
    Ok(acc.finish())
}

/// `a³_{Q_3} = ⟨C*_{P'}(f_3), φ_{Q_3}⟩` for `Q ∈ D`, where `P'` keeps the
/// `P` with `P_1 ≤ Q_3` for some `Q ∈ D`; `D`'s 3-tiles must be disjoint.
pub fn a3_via_adjoint(
    d: &[Quartile],
    p_coll: &TileCollection,
    f3: &StepFunction,
    n: &ChoiceFunction,
) -> Result<CoefficientSequence> {
    let restricted = biest_restriction(p_coll.members(), d, 1, 3)?;
    let sub = p_coll.with_members(restricted);
    let g = carleson_adjoint_quartiles(&sub, f3, n)?;
    let mut seq = CoefficientSequence::new();
    for q in d {
        seq.insert(*q, 3, p_coll.grid().packets().get(&q.subtile(3)).inner(&g));
    }
    Ok(seq)
}

/// `Λ''` in the rearranged form
/// `Σ_Q ⟨f_2, φ_{Q_1}⟩ ⟨φ_{Q_1} χ_{N ∈ ω_{Q_2}}, C^c_{Q_{12},P}(f_1) f_3⟩`.
pub fn lambda_double_prime_rearranged(
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    f3: &StepFunction,
    n: &ChoiceFunction,
) -> Result<QuadExt> {
    check_pair(p_coll, q_coll, &[f1, f2, f3], n)?;
    let grid = p_coll.grid();
    let mut acc = QuadAccumulator::default();
    for q in q_coll {
        let packet = grid.packets().get(&q.subtile(1));
        let b = packet.inner(f2);
        if b.is_zero() {
            continue;
        }
        let cc = c_complement(&q.p12(), p_coll, f1, n)?.mul(f3)?;
        let w2 = q.subtile(2).freq();
        acc.add(&(&b * &packet.inner_masked(cc.values(), |c| n.in_freq(c, &w2))));
    }
    Ok(acc.finish())
}

/// `C_P(f_1) C_Q(f_2) − T''_{P,Q}(f_1, f_2) − T''_{Q,P}(f_2, f_1)`.
pub fn product_identity_residual(
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    n: &ChoiceFunction,
) -> Result<StepFunction> {
    let product = carleson_quartiles(p_coll, f1, n)?.mul(&carleson_quartiles(q_coll, f2, n)?)?;
    product
        .sub(&t_double_prime_apply(p_coll, q_coll, f1, f2, n)?)?
        .sub(&t_double_prime_apply(q_coll, p_coll, f2, f1, n)?)
}

/// `Σ_{R ∈ P ∩ Q} ⟨f_1, φ_{R_1}⟩ ⟨f_2, φ_{R_1}⟩ φ_{R_1}² χ_{N ∈ ω_{R_2}}`, the
/// part of `C_P(f_1) C_Q(f_2)` on pairs with `ω_{P_2} = ω_{Q_2}` that neither
/// `T''` term picks up.
pub fn product_identity_diagonal(
    p_coll: &TileCollection,
    q_coll: &TileCollection,
    f1: &StepFunction,
    f2: &StepFunction,
    n: &ChoiceFunction,
) -> Result<StepFunction> {
    check_pair(p_coll, q_coll, &[f1, f2], n)?;
    let grid = p_coll.grid();
    let mut out = accumulators(grid);
    for r in p_coll.iter().filter(|r| q_coll.contains(r)) {
        let packet = grid.packets().get(&r.subtile(1));
        let coef = &(&packet.inner(f1) * &packet.inner(f2)) * &packet.amplitude.square();
        let w2 = r.subtile(2).freq();
        for c in packet.cells() {
            if n.in_freq(c, &w2) {
                out[c].add(&coef);
            }
        }
    }
    Ok(finish(grid.m(), out))
}
