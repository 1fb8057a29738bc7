mod common;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;
use wtf_core::num::{DyadicRational, QuadExt};

/// Sign of `a + b√2` from continued-fraction convergents `p/q → √2`:
/// `|q√2 − p| < 1/q`, so `a q + b p` has the sign of `q (a + b√2)` once it
/// exceeds `|b|/q ≤ |b|` in magnitude.
fn oracle_sign(a: i64, b: i64) -> i32 {
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::one(), BigInt::zero(), BigInt::one(), BigInt::one());
    if a.is_zero() && b.is_zero() {
        return 0;
    }
    for _ in 0..200 {
        let s = &a * &q1 + &b * &p1;
        if s.abs() > b.abs() {
            return if s.is_positive() { 1 } else { -1 };
        }
        // √2 = [1; 2, 2, 2, ...].
        let (p2, q2) = (&p1 * 2 + &p0, &q1 * 2 + &q0);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    panic!("a + b√2 is irrational, so the sign is decided within 200 steps")
}

fn quad() -> impl Strategy<Value = QuadExt> {
    (-1000i64..1000, -1000i64..1000, -4i32..6).prop_map(|(a, b, m)| QuadExt::new(a, b, m))
}

#[test]
fn sign_agrees_with_high_precision_on_ten_thousand_values() {
    let mut rng = common::rng(0x51a7);
    for _ in 0..10_000 {
        // Include near-cancellations a ≈ −b√2 from convergents of √2.
        let (a, b) = if rng.gen_bool(0.3) {
            let (p, q) = [(3i64, 2i64), (7, 5), (17, 12), (41, 29), (99, 70), (665857, 470832)][rng.gen_range(0..6)];
            let s = rng.gen_range(1i64..1000);
            (s * p * if rng.gen_bool(0.5) { 1 } else { -1 }, -s * q * if rng.gen_bool(0.9) { 1 } else { -1 })
        } else {
            (rng.gen_range(-1i64 << 40..1i64 << 40), rng.gen_range(-1i64 << 40..1i64 << 40))
        };
        let m = rng.gen_range(-8..8);
        assert_eq!(QuadExt::new(a, b, m).signum(), oracle_sign(a, b), "a={a} b={b} m={m}");
    }
}

proptest! {
    #[test]
    fn ring_laws(x in quad(), y in quad(), z in quad()) {
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(x.square(), &x * &x);
    }

    #[test]
    fn order_matches_floats_when_separated(x in quad(), y in quad()) {
        let (fx, fy) = (x.to_f64(), y.to_f64());
        if (fx - fy).abs() > 1e-9 * (1.0 + fx.abs() + fy.abs()) {
            prop_assert_eq!(x < y, fx < fy);
        }
        prop_assert_eq!(x.clone().max(y.clone()) >= x.clone().min(y.clone()), true);
    }

    #[test]
    fn squares_are_nonnegative_and_abs_is_idempotent(x in quad()) {
        prop_assert!(x.square().signum() >= 0);
        prop_assert_eq!(x.abs().abs(), x.abs());
        prop_assert_eq!(x.abs().square(), x.square());
    }

    #[test]
    fn scaling_by_powers_of_two(x in quad(), e in -6i32..6) {
        prop_assert_eq!(x.scale_pow2(e).scale_pow2(-e), x.clone());
        prop_assert_eq!(x.scale_pow2(e), &x * &QuadExt::pow2(e));
        prop_assert_eq!(QuadExt::sqrt2_pow(2 * e), QuadExt::pow2(e));
    }

    #[test]
    fn json_round_trip(x in quad()) {
        let text = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<QuadExt>(&text).unwrap(), x);
    }

    #[test]
    fn dyadic_rationals_embed_exactly(n in -100_000i64..100_000, e in -10i32..10) {
        let d = DyadicRational::new(n, e);
        let q = QuadExt::from_dyadic(&d);
        prop_assert!(q.is_rational());
        prop_assert_eq!(q.to_dyadic(), Some(d.clone()));
        prop_assert_eq!(q.signum(), d.signum());
    }
}
