mod common;

use common::*;
use wtf_core::dyadic::{AmbientGrid, ChoiceFunction, DyadicInterval, StepFunction};
use wtf_core::num::QuadExt;
use wtf_core::operators::*;
use wtf_core::tiles::{tiles_disjoint, BitileCollection, Quartile, Rect, Tile, TileCollection};
use wtf_core::wavepacket::wave_packet;

fn phi(g: &AmbientGrid, t: &Tile) -> StepFunction {
    wave_packet(g, t).unwrap()
}

fn ip(f: &StepFunction, g: &StepFunction) -> QuadExt {
    f.inner_product(g).unwrap()
}

/// Indicator of `{x : N(x) ∈ ω}` built from interval comparisons.
fn chi(n: &ChoiceFunction, w: &DyadicInterval) -> StepFunction {
    let (lo, hi) = (w.start(), w.end());
    StepFunction::from_fn(n.m(), |c| {
        let v = n.value(c);
        if *v >= lo && *v < hi {
            QuadExt::one()
        } else {
            QuadExt::zero()
        }
    })
}

fn sum(m: u32, terms: impl IntoIterator<Item = StepFunction>) -> StepFunction {
    terms.into_iter().fold(StepFunction::zero(m), |acc, t| acc.add(&t).unwrap())
}

fn carleson_oracle<'a>(
    g: &AmbientGrid,
    qs: impl IntoIterator<Item = &'a Quartile>,
    f: &StepFunction,
    n: &ChoiceFunction,
) -> StepFunction {
    sum(
        g.m(),
        qs.into_iter().map(|q| {
            let p1 = phi(g, &q.subtile(1));
            p1.scale(&ip(f, &p1)).mul(&chi(n, &q.subtile(2).freq())).unwrap()
        }),
    )
}

fn bht_oracle<'a>(g: &AmbientGrid, qs: impl IntoIterator<Item = &'a Quartile>, f1: &StepFunction, f2: &StepFunction) -> StepFunction {
    sum(
        g.m(),
        qs.into_iter().map(|q| {
            let c = &(&ip(f1, &phi(g, &q.subtile(1))) * &ip(f2, &phi(g, &q.subtile(2)))) * &QuadExt::sqrt2_pow(q.k());
            phi(g, &q.subtile(3)).scale(&c)
        }),
    )
}

fn t_prime_oracle(p: &TileCollection, q: &TileCollection, f1: &StepFunction, f2: &StepFunction, n: &ChoiceFunction) -> StepFunction {
    let g = p.grid();
    sum(
        g.m(),
        p.iter().map(|pp| {
            let p1 = pp.subtile(1);
            let w = p1.freq();
            let b = bht_oracle(g, q.iter().filter(|qq| qq.subtile(3).freq().subset_of(&w)), f1, f2);
            let ph = phi(g, &p1);
            ph.scale(&ip(&b, &ph)).mul(&chi(n, &pp.subtile(2).freq())).unwrap()
        }),
    )
}

fn t_double_prime_oracle(p: &TileCollection, q: &TileCollection, f1: &StepFunction, f2: &StepFunction, n: &ChoiceFunction) -> StepFunction {
    let g = p.grid();
    sum(
        g.m(),
        p.iter().map(|pp| {
            let w2 = pp.subtile(2).freq();
            let c = carleson_oracle(g, q.iter().filter(|qq| qq.subtile(1).freq().subset_of(&w2)), f2, n);
            let ph = phi(g, &pp.subtile(1));
            ph.scale(&ip(f1, &ph)).mul(&c).unwrap().mul(&chi(n, &w2)).unwrap()
        }),
    )
}

struct Case {
    p: TileCollection,
    q: TileCollection,
    f1: StepFunction,
    f2: StepFunction,
    f3: StepFunction,
    n: ChoiceFunction,
}

fn cases(m: u32, count: usize, size: usize) -> Vec<Case> {
    let g = grid(m);
    let mut r = rng(7 + m as u64);
    (0..count)
        .map(|t| {
            let shared = random_collection(&mut r, &g, size);
            let mut p = random_collection(&mut r, &g, size);
            if t % 2 == 0 {
                // Overlapping collections exercise the diagonal terms.
                p = TileCollection::new(&g, p.iter().chain(shared.iter().take(size / 2)).copied().collect()).unwrap();
            }
            Case {
                p,
                q: shared,
                f1: random_rich_function(&mut r, m),
                f2: random_rich_function(&mut r, m),
                f3: random_function(&mut r, m, 0.6),
                n: random_choice(&mut r, m),
            }
        })
        .collect()
}

#[test]
fn carleson_matches_oracle_and_adjoint() {
    for c in cases(2, 20, 6) {
        let g = c.p.grid();
        let direct = carleson_quartiles(&c.p, &c.f1, &c.n).unwrap();
        assert_eq!(direct, carleson_oracle(g, &c.p, &c.f1, &c.n));
        let adj = carleson_adjoint_quartiles(&c.p, &c.f2, &c.n).unwrap();
        assert_eq!(ip(&direct, &c.f2), ip(&c.f1, &adj));
        let bitiles = BitileCollection::new(g, c.p.iter().map(|q| q.p12()).collect()).unwrap();
        assert_eq!(carleson_apply(&bitiles, &c.f1, &c.n).unwrap(), direct);
        assert_eq!(carleson_adjoint_apply(&bitiles, &c.f2, &c.n).unwrap(), adj);
    }
}

#[test]
fn bht_matches_oracle() {
    for c in cases(2, 20, 8) {
        assert_eq!(bht_apply(&c.q, &c.f1, &c.f2).unwrap(), bht_oracle(c.q.grid(), &c.q, &c.f1, &c.f2));
    }
}

#[test]
fn bht_is_bilinear() {
    let mut r = rng(3);
    let g = grid(2);
    let coll = random_collection(&mut r, &g, 10);
    let (f, h, f2) = (random_rich_function(&mut r, 2), random_rich_function(&mut r, 2), random_rich_function(&mut r, 2));
    let s = QuadExt::new(3, 1, 1);
    let lhs = bht_apply(&coll, &f.scale(&s).add(&h).unwrap(), &f2).unwrap();
    let rhs = bht_apply(&coll, &f, &f2).unwrap().scale(&s).add(&bht_apply(&coll, &h, &f2).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn t_prime_and_double_prime_match_oracles() {
    for m in [2, 3] {
        for c in cases(m, 6, 7) {
            assert_eq!(t_prime_apply(&c.p, &c.q, &c.f1, &c.f2, &c.n).unwrap(), t_prime_oracle(&c.p, &c.q, &c.f1, &c.f2, &c.n));
            assert_eq!(
                t_double_prime_apply(&c.p, &c.q, &c.f1, &c.f2, &c.n).unwrap(),
                t_double_prime_oracle(&c.p, &c.q, &c.f1, &c.f2, &c.n)
            );
        }
    }
}

#[test]
fn forms_split_and_rearrange() {
    for m in [2, 3] {
        for c in cases(m, 8, 8) {
            let l = lambda_form(Form::Lambda, &c.p, &c.q, &c.f1, &c.f2, &c.f3, &c.n).unwrap();
            let l1 = lambda_form(Form::LambdaPrime, &c.p, &c.q, &c.f1, &c.f2, &c.f3, &c.n).unwrap();
            let l2 = lambda_form(Form::LambdaDoublePrime, &c.p, &c.q, &c.f1, &c.f2, &c.f3, &c.n).unwrap();
            assert_eq!(l, &l1 + &l2);
            assert_eq!(lambda_prime_reordered(&c.p, &c.q, &c.f1, &c.f2, &c.f3, &c.n).unwrap(), l1);
            assert_eq!(lambda_double_prime_rearranged(&c.p, &c.q, &c.f1, &c.f2, &c.f3, &c.n).unwrap(), l2);
        }
    }
}

#[test]
fn product_identity_leaves_only_the_diagonal() {
    for m in [2, 3] {
        for c in cases(m, 8, 8) {
            let residual = product_identity_residual(&c.p, &c.q, &c.f1, &c.f2, &c.n).unwrap();
            assert_eq!(residual, product_identity_diagonal(&c.p, &c.q, &c.f1, &c.f2, &c.n).unwrap());
        }
    }
}

#[test]
fn product_identity_exact_for_disjoint_collections() {
    for c in cases(3, 10, 8) {
        let p = c.p.filter(|x| !c.q.contains(x));
        let residual = product_identity_residual(&p, &c.q, &c.f1, &c.f2, &c.n).unwrap();
        assert!(residual.is_zero());
    }
}

#[test]
fn a3_via_adjoint_agrees_on_disjoint_families() {
    for m in [2, 3] {
        for c in cases(m, 10, 12) {
            let mut d: Vec<Quartile> = Vec::new();
            for q in &c.q {
                if d.iter().all(|e| tiles_disjoint(&e.subtile(3), &q.subtile(3))) {
                    d.push(*q);
                }
            }
            let direct = a3_coefficients(&c.q.with_members(d.clone()), &c.p, &c.f3, &c.n).unwrap();
            let adjoint = a3_via_adjoint(&d, &c.p, &c.f3, &c.n).unwrap();
            for q in &d {
                assert_eq!(direct.get(q, 3), adjoint.get(q, 3), "{q}");
            }
        }
    }
}

#[test]
fn empty_collections_give_zero() {
    let g = grid(2);
    let mut r = rng(1);
    let e = TileCollection::empty(&g);
    let (f1, f2, n) = (random_rich_function(&mut r, 2), random_rich_function(&mut r, 2), random_choice(&mut r, 2));
    let q = random_collection(&mut r, &g, 5);
    assert!(bht_apply(&e, &f1, &f2).unwrap().is_zero());
    assert!(t_prime_apply(&e, &q, &f1, &f2, &n).unwrap().is_zero());
    assert!(t_prime_apply(&q, &e, &f1, &f2, &n).unwrap().is_zero());
    assert!(t_double_prime_apply(&q, &e, &f1, &f2, &n).unwrap().is_zero());
}

#[test]
fn grid_mismatch_is_rejected() {
    let g = grid(2);
    let coll = TileCollection::empty(&g);
    let f = StepFunction::zero(3);
    assert!(bht_apply(&coll, &f, &f).is_err());
}
