mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use wtf_core::decompose::{full_partition, DecomposeOptions, Functional};
use wtf_core::num::QuadExt;
use wtf_core::tiles::{enumerate_quartiles, Rect, TileCollection};
use wtf_core::treenorms::{b_energy, b_size, energy_scalar, size_scalar, Tree};
use wtf_core::wavepacket::{analyze, wave_packet};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn energy_is_bounded_by_the_l2_norm(seed in any::<u64>(), size in 1usize..24, j in 1usize..=3) {
        let g = grid(3);
        let mut r = rng(seed);
        let f = random_rich_function(&mut r, 3);
        let coll = random_collection(&mut r, &g, size);
        let e_sq = energy_scalar(&analyze(&f, &coll, &[j]).unwrap(), &coll, j).unwrap();
        prop_assert!(e_sq <= f.inner_product(&f).unwrap());
    }

    #[test]
    fn sizes_and_energies_grow_with_the_collection(seed in any::<u64>(), size in 1usize..16, j in 1usize..=3) {
        let g = grid(2);
        let mut r = rng(seed);
        let f = random_function(&mut r, 2, 0.5);
        let coll = random_collection(&mut r, &g, size);
        let keep: Vec<bool> = coll.iter().map(|_| r.gen_bool(0.5)).collect();
        let sub = coll.with_members(coll.iter().zip(&keep).filter(|(_, k)| **k).map(|(q, _)| *q).collect());
        let measure = |c: &TileCollection| {
            let seq = analyze(&f, c, &[j]).unwrap();
            (size_scalar(&seq, c, j).unwrap(), energy_scalar(&seq, c, j).unwrap())
        };
        let ((s_sub, e_sub), (s, e)) = (measure(&sub), measure(&coll));
        prop_assert!(s_sub <= s && e_sub <= e);
        let n = random_choice(&mut r, 2);
        prop_assert!(b_size(&f, &n, &sub).unwrap() <= b_size(&f, &n, &coll).unwrap());
        prop_assert!(b_energy(&f, &n, &sub).unwrap() <= b_energy(&f, &n, &coll).unwrap());
    }

    #[test]
    fn size_of_a_single_packet(a in 0usize..10_000, j in 1usize..=3) {
        let g = grid(2);
        let all = enumerate_quartiles(&g);
        let p = all[a % all.len()];
        let coll = TileCollection::new(&g, vec![p]).unwrap();
        let f = wave_packet(&g, &p.subtile(j)).unwrap();
        // |I_P|^{-1} |⟨f, φ_{P_j}⟩|² with |I_P| = 2^{-k}.
        prop_assert_eq!(size_scalar(&analyze(&f, &coll, &[j]).unwrap(), &coll, j).unwrap(), QuadExt::pow2(p.k()));
    }

    #[test]
    fn size_partitions_are_exact_and_certified(seed in any::<u64>(), size in 1usize..14, j in 1usize..=3) {
        let g = grid(2);
        let mut r = rng(seed);
        let f = random_rich_function(&mut r, 2);
        let coll = random_collection(&mut r, &g, size);
        let which = Functional::Size { coll: &coll, j, f: &f };
        let part = full_partition(&which, &DecomposeOptions::default()).unwrap();
        prop_assert!(part.partitions(&coll));
        prop_assert!(part.certified());
    }

    #[test]
    fn bsize_partitions_are_exact_and_certified(seed in any::<u64>(), size in 1usize..14) {
        let g = grid(2);
        let mut r = rng(seed);
        let f = random_function(&mut r, 2, 0.5);
        let n = random_choice(&mut r, 2);
        let coll = random_collection(&mut r, &g, size);
        let which = Functional::BSize { coll: &coll, g: &f, n: &n };
        let part = full_partition(&which, &DecomposeOptions::default()).unwrap();
        prop_assert!(part.partitions(&coll));
        prop_assert!(part.certified());
    }

    #[test]
    fn trees_reject_members_outside_the_top(a in 0usize..10_000, b in 0usize..10_000, i in 1usize..=3) {
        let all = enumerate_quartiles(&grid(2));
        let (top, p) = (all[a % all.len()], all[b % all.len()]);
        let inside = wtf_core::tiles::below_or_equal(&p.subtile(i), &top.subtile(i));
        prop_assert_eq!(Tree::new(top, i, vec![p]).is_ok(), inside);
    }
}
