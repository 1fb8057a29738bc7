//! Random instance generators.
//!
//! Sets are unions of fine cells drawn by Bernoulli(ρ) inside a random dyadic
//! window; bounded functions take values in {-1, 0, 1} on their support.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wtf_core::dyadic::{cells_for, AmbientGrid, ChoiceFunction, DyadicInterval, Region, StepFunction};
use wtf_core::num::{DyadicRational, QuadExt};
use wtf_core::tiles::{below_or_equal, enumerate_quartiles, Quartile, Rect, TileCollection};
use wtf_core::treenorms::bitiles_above;

/// Bernoulli densities used for random sets.
pub const DENSITIES: [f64; 2] = [0.25, 0.5];

/// The RNG stream of trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// A dyadic interval of length `2^s` inside `[0, 2^M)`, with `s` uniform in `[lo, M]`.
pub fn random_window(rng: &mut impl Rng, m: u32, lo: i32) -> DyadicInterval {
    let m = m as i32;
    let s = rng.gen_range(lo.max(-m)..=m);
    DyadicInterval::new(s, rng.gen_range(0..1i64 << (m - s)))
}

/// Nonempty union of fine cells inside a random window, each kept with probability `ρ`.
pub fn random_region(rng: &mut impl Rng, m: u32) -> Region {
    let window = random_window(rng, m, -(m as i32));
    region_in(rng, m, &window)
}

/// Like [`random_region`], but inside a random sub-window of `outer`.
pub fn region_in(rng: &mut impl Rng, m: u32, outer: &DyadicInterval) -> Region {
    let s = rng.gen_range(-(m as i32)..=outer.scale);
    let d = outer.scale - s;
    let window = DyadicInterval::new(s, (outer.index << d) + rng.gen_range(0..1i64 << d));
    region_on(rng, m, &window)
}

/// Nonempty union of fine cells of `window`, each kept with probability `ρ`.
pub fn region_on(rng: &mut impl Rng, m: u32, window: &DyadicInterval) -> Region {
    let rho = *DENSITIES.choose(rng).expect("nonempty");
    let range = wtf_core::dyadic::cell_range(m, window);
    let mut cells = vec![false; cells_for(m)];
    for c in range.clone() {
        cells[c] = rng.gen_bool(rho);
    }
    if !cells.iter().any(|&b| b) {
        cells[rng.gen_range(range)] = true;
    }
    Region::from_cells(m, cells).expect("sized")
}

/// Three sets sharing a random window so that their interactions are not all trivial.
pub fn region_triple(rng: &mut impl Rng, m: u32) -> [Region; 3] {
    let outer = random_window(rng, m, 0);
    [region_in(rng, m, &outer), region_in(rng, m, &outer), region_in(rng, m, &outer)]
}

/// A set of measure exactly 1: `2^M` fine cells inside a window of length at least 1.
pub fn unit_region(rng: &mut impl Rng, m: u32) -> Region {
    let window = random_window(rng, m, 0);
    unit_region_on(rng, m, &window)
}

/// `2^M` fine cells of `window`, which must have length at least 1.
pub fn unit_region_on(rng: &mut impl Rng, m: u32, window: &DyadicInterval) -> Region {
    assert!(window.scale >= 0, "window shorter than 1");
    let range = wtf_core::dyadic::cell_range(m, window);
    let mut cells = vec![false; cells_for(m)];
    for c in index::sample(rng, range.len(), 1 << m) {
        cells[range.start + c] = true;
    }
    Region::from_cells(m, cells).expect("sized")
}

/// A function in `X(E)` with values in {-1, 0, 1}; each cell of `E` is zero with probability `zero`.
pub fn x_function(rng: &mut impl Rng, e: &Region, zero: f64) -> StepFunction {
    StepFunction::from_fn(e.m(), |c| {
        if !e.contains_cell(c) || rng.gen_bool(zero) {
            QuadExt::zero()
        } else {
            QuadExt::integer(if rng.gen_bool(0.5) { 1 } else { -1 })
        }
    })
}

/// Values `(a + b√2) 2^{-e}` with small integers; a generic `L²` function.
pub fn rich_function(rng: &mut impl Rng, m: u32) -> StepFunction {
    let support = random_region(rng, m);
    StepFunction::from_fn(m, |c| {
        if !support.contains_cell(c) {
            return QuadExt::zero();
        }
        let a = rng.gen_range(-3i64..=3);
        let b = if rng.gen_bool(0.3) { rng.gen_range(-2i64..=2) } else { 0 };
        QuadExt::new(a, b, rng.gen_range(0..3))
    })
}

/// `N` takes a value `(2j + 1) 2^{-M-1}` on each fine cell, so it never sits
/// on a dyadic endpoint of the grid.
pub fn random_choice(rng: &mut impl Rng, m: u32) -> ChoiceFunction {
    let top = 1i64 << (2 * m);
    let clustered = rng.gen_bool(0.5);
    let centre = rng.gen_range(0..top);
    let values = (0..cells_for(m))
        .map(|_| {
            let j = if clustered { (centre + rng.gen_range(-8..=8)).rem_euclid(top) } else { rng.gen_range(0..top) };
            DyadicRational::new(2 * j + 1, m as i32 + 1)
        })
        .collect();
    ChoiceFunction::new(m, values).expect("values in range")
}

/// `size` quartiles drawn uniformly from the grid.
pub fn uniform_collection(rng: &mut impl Rng, grid: &AmbientGrid, size: usize) -> TileCollection {
    let mut all = enumerate_quartiles(grid);
    all.shuffle(rng);
    all.truncate(size);
    TileCollection::new(grid, all).expect("grid quartiles")
}

/// Up to `size` quartiles, roughly half taken from the maximal trees of a few
/// random tops so that trees of several quartiles occur.
pub fn random_collection(rng: &mut impl Rng, grid: &AmbientGrid, size: usize) -> TileCollection {
    let all = enumerate_quartiles(grid);
    let mut picked: Vec<Quartile> = Vec::new();
    let target_tree = size / 2;
    let mut attempts = 0;
    while picked.len() < target_tree && attempts < 8 {
        attempts += 1;
        let top = *all.choose(rng).expect("nonempty grid");
        let i = rng.gen_range(1..=3);
        let top_i = top.subtile(i);
        let mut tree: Vec<Quartile> = all.iter().filter(|p| below_or_equal(&p.subtile(i), &top_i)).copied().collect();
        tree.shuffle(rng);
        tree.truncate(target_tree - picked.len());
        picked.extend(tree);
    }
    let mut rest = all;
    rest.shuffle(rng);
    picked.extend(rest.into_iter().take(size.saturating_sub(picked.len())));
    picked.sort();
    picked.dedup();
    TileCollection::new(grid, picked).expect("grid quartiles")
}

/// Random collection whose size is uniform in `[lo, hi]`.
pub fn collection_between(rng: &mut impl Rng, grid: &AmbientGrid, lo: usize, hi: usize) -> TileCollection {
    let size = rng.gen_range(lo..=hi);
    random_collection(rng, grid, size)
}

/// Whether every point of `I_Q` with `N ∈ ω_{Q_{12}}` also has `N ∈ ω_{Q'_{12}}`
/// for some grid quartile with `Q_{12} < Q'_{12}`. On the whole plane such
/// a `Q'` always exists; on a finite grid it may lie above the coarsest scale.
pub fn witness_covered(q: &Quartile, n: &ChoiceFunction, grid: &AmbientGrid) -> bool {
    let b = q.p12();
    let above = bitiles_above(&b, grid);
    grid.cell_range(&b.interval()).all(|c| !n.in_freq(c, &b.freq()) || above.iter().any(|w| n.in_freq(c, &w.freq())))
}

/// Shared window, frequency and choice function for a family of sets.
#[derive(Clone, Debug)]
pub struct Scene {
    pub window: DyadicInterval,
    /// Frequency around which `N` clusters.
    pub xi: DyadicRational,
    pub sets: [Region; 3],
    pub n: ChoiceFunction,
}

/// Sets in a common window and `N` concentrated near a random frequency, so
/// that forms built on the scene rarely vanish identically.
pub fn scene(rng: &mut impl Rng, m: u32) -> Scene {
    let window = random_window(rng, m, 0);
    let sets = [region_on(rng, m, &window), region_on(rng, m, &window), region_on(rng, m, &window)];
    let top = 1i64 << (2 * m);
    // Frequencies in the upper half only meet fine-scale quartiles on a finite grid.
    let centre = rng.gen_range(0..top / 2);
    let spread = 1i64 << rng.gen_range(0..=2 * m);
    let values = (0..cells_for(m))
        .map(|_| {
            let j = (centre + rng.gen_range(-spread..=spread)).clamp(0, top - 1);
            DyadicRational::new(2 * j + 1, m as i32 + 1)
        })
        .collect();
    Scene { window, xi: DyadicRational::new(2 * centre + 1, m as i32 + 1), sets, n: ChoiceFunction::new(m, values).expect("values in range") }
}

/// Up to `hi` quartiles, mostly ones whose spatial interval meets the scene's
/// window and whose frequency interval (or a random one of its subtiles)
/// contains the scene's frequency. With `covered`, only quartiles passing
/// [`witness_covered`] are used.
pub fn scene_collection(rng: &mut impl Rng, grid: &AmbientGrid, sc: &Scene, lo: usize, hi: usize, covered: bool) -> TileCollection {
    let all: Vec<Quartile> = enumerate_quartiles(grid).into_iter().filter(|q| !covered || witness_covered(q, &sc.n, grid)).collect();
    if all.is_empty() {
        return TileCollection::empty(grid);
    }
    // 0 asks for ξ ∈ ω_Q, j ≥ 1 for ξ ∈ ω_{Q_j}.
    let j = rng.gen_range(0..=3usize);
    let hits = |q: &Quartile| if j == 0 { q.freq().contains_point(&sc.xi) } else { q.subtile(j).freq().contains_point(&sc.xi) };
    let mut near: Vec<Quartile> = all.iter().filter(|q| q.interval().intersects(&sc.window) && hits(q)).copied().collect();
    let size = rng.gen_range(lo..=hi);
    near.shuffle(rng);
    let mut picked: Vec<Quartile> = near.into_iter().take(size - size / 4).collect();
    if picked.is_empty() && lo > 0 {
        picked.push(*all.choose(rng).expect("nonempty"));
    }
    let mut rest = all;
    rest.shuffle(rng);
    picked.extend(rest.into_iter().take(size.saturating_sub(picked.len())));
    picked.sort();
    picked.dedup();
    TileCollection::new(grid, picked).expect("grid quartiles")
}
