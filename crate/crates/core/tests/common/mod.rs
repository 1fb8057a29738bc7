#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wtf_core::dyadic::{cells_for, AmbientGrid, ChoiceFunction, StepFunction};
use wtf_core::num::{DyadicRational, QuadExt};
use wtf_core::tiles::{enumerate_quartiles, TileCollection};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(m: u32) -> AmbientGrid {
    AmbientGrid::new(m).unwrap()
}

/// Values in {-1, 0, 1} on fine cells, nonzero with probability `density`.
pub fn random_function(rng: &mut impl Rng, m: u32, density: f64) -> StepFunction {
    StepFunction::from_fn(m, |_| {
        if rng.gen_bool(density) {
            QuadExt::integer(if rng.gen_bool(0.5) { 1 } else { -1 })
        } else {
            QuadExt::zero()
        }
    })
}

/// Small integer values, occasionally scaled by √2.
pub fn random_rich_function(rng: &mut impl Rng, m: u32) -> StepFunction {
    StepFunction::from_fn(m, |_| {
        let a = rng.gen_range(-3i64..=3);
        let b = if rng.gen_bool(0.3) { rng.gen_range(-2i64..=2) } else { 0 };
        QuadExt::new(a, b, rng.gen_range(0..3))
    })
}

/// `N` takes the value `(2j + 1) 2^{-M-1}` on each fine cell.
pub fn random_choice(rng: &mut impl Rng, m: u32) -> ChoiceFunction {
    let top = 1i64 << (2 * m);
    let values = (0..cells_for(m)).map(|_| DyadicRational::new(2 * rng.gen_range(0..top) + 1, m as i32 + 1)).collect();
    ChoiceFunction::new(m, values).unwrap()
}

pub fn random_collection(rng: &mut impl Rng, grid: &AmbientGrid, size: usize) -> TileCollection {
    let mut all = enumerate_quartiles(grid);
    all.shuffle(rng);
    all.truncate(size);
    TileCollection::new(grid, all).unwrap()
}
