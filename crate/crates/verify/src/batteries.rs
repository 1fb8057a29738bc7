//! Exhaustive and randomized batteries for the exact structural facts:
//! packet normalization and orthogonality, fixed-scale Parseval, the
//! lacunarity and decoupling properties, fast-vs-oracle equivalence of every
//! size and energy, and the decomposition certificates and partitions.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use wtf_core::decompose::{full_partition, DecomposeOptions, Functional};
use wtf_core::dyadic::{AmbientGrid, ChoiceFunction, StepFunction};
use wtf_core::num::QuadExt;
use wtf_core::tiles::{
    biest_restriction, check_lacunar, enumerate_quartiles, enumerate_tiles, tiles_disjoint, Quartile, Rect, Tile, TileCollection,
};
use wtf_core::treenorms::{
    b_energy, bitiles_above, b_size_in, energy_doubleprime, energy_prime, energy_scalar, max_weight_antichain, size_doubleprime, size_prime_in,
    size_scalar, AntichainMode, AntichainProblem, Domain, DoublePrimeMode,
};
use wtf_core::wavepacket::{analyze, packet_inner, wave_packet};

use crate::gen::{collection_between, random_choice, rich_function, scene, scene_collection, trial_rng};
use crate::oracle::{self, Tops};
use crate::Result;

/// Outcome of one battery: how many cases ran and which failed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BatteryReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Up to a few failing cases, for diagnosis.
    pub examples: Vec<String>,
    pub notes: Vec<String>,
}

impl BatteryReport {
    fn new(name: &str) -> Self {
        BatteryReport { name: name.to_string(), ..Default::default() }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < 5 {
                self.examples.push(describe());
            }
        }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn summary_line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!("{verdict} {} cases={} failures={}", self.name, self.cases, self.failures);
        for n in &self.notes {
            s.push_str(&format!(" {n}"));
        }
        if let Some(e) = self.examples.first() {
            s.push_str(&format!(" first_failure={e}"));
        }
        s
    }

    pub fn merge(mut self, other: BatteryReport) -> Self {
        self.cases += other.cases;
        self.failures += other.failures;
        self.examples.extend(other.examples.into_iter().take(5usize.saturating_sub(self.examples.len())));
        self.notes.extend(other.notes);
        self
    }
}

/// `‖φ_P‖² = 1` for every tile of the grid.
pub fn packet_normalization(m: u32) -> Result<BatteryReport> {
    let grid = AmbientGrid::new(m)?;
    let mut rep = BatteryReport::new("packet-normalization");
    for t in enumerate_tiles(&grid) {
        let norm = wave_packet(&grid, &t)?.l2_squared_exact();
        rep.case(norm == QuadExt::one(), || format!("{t} has ‖φ‖² = {norm}"));
    }
    Ok(rep.note(format!("M={m}")))
}

/// `⟨φ_P, φ_{P'}⟩ = 0` for every pair of disjoint tiles.
pub fn packet_orthogonality(m: u32) -> Result<BatteryReport> {
    let grid = AmbientGrid::new(m)?;
    let tiles = enumerate_tiles(&grid);
    let mut rep = BatteryReport::new("packet-orthogonality");
    for (a, p) in tiles.iter().enumerate() {
        for q in tiles[a + 1..].iter().filter(|q| tiles_disjoint(p, *q)) {
            let ip = packet_inner(&grid, p, q);
            rep.case(ip.is_zero(), || format!("⟨φ_{p}, φ_{q}⟩ = {ip}"));
        }
    }
    Ok(rep.note(format!("M={m}")))
}

/// `Σ_{|I_P| = 2^{-k}} ⟨f, φ_P⟩² = ‖f‖²` at every scale, for random `f`.
pub fn fixed_scale_parseval(m: u32, functions: usize, seed: u64) -> Result<BatteryReport> {
    let grid = AmbientGrid::new(m)?;
    let tiles = enumerate_tiles(&grid);
    let mut rep = BatteryReport::new("fixed-scale-parseval");
    for t in 0..functions {
        let f = rich_function(&mut trial_rng(seed, t), m);
        let norm = f.l2_squared_exact();
        for k in -(m as i32)..=(m as i32) {
            let sum: QuadExt = tiles.iter().filter(|p| p.k() == k).map(|p| grid.packets().get(p).inner(&f).square()).sum();
            rep.case(sum == norm, || format!("trial {t} scale {k}: {sum} ≠ {norm}"));
        }
    }
    Ok(rep.note(format!("M={m} functions={functions}")))
}

/// "If `P'_i ≤ P_i` then `P'_j ∩ P_j = ∅`" for every pair of distinct
/// quartiles and every `i ≠ j`, cross-checked against the oracle geometry.
pub fn lacunar_exhaustive(m: u32) -> Result<BatteryReport> {
    let grid = AmbientGrid::new(m)?;
    let all = enumerate_quartiles(&grid);
    let mut rep = BatteryReport::new("lacunar");
    for p in &all {
        for q in all.iter().filter(|q| *q != p) {
            for i in 1..=3 {
                for j in (1..=3).filter(|&j| j != i) {
                    let fast = check_lacunar(p, q, i, j);
                    let brute = !oracle::part(m, q, i).le(&oracle::part(m, p, i))
                        || oracle::part(m, q, j).disjoint(&oracle::part(m, p, j));
                    rep.case(fast && brute, || format!("P={p} P'={q} i={i} j={j} fast={fast} oracle={brute}"));
                }
            }
        }
    }
    Ok(rep.note(format!("M={m}")))
}

/// A random family whose `j`-tiles are pairwise disjoint.
fn disjoint_family(rng: &mut impl Rng, all: &[Quartile], j: usize, m: u32) -> Vec<Quartile> {
    let mut pool = all.to_vec();
    pool.shuffle(rng);
    let want = rng.gen_range(1..=8);
    let mut out: Vec<Quartile> = Vec::new();
    for q in pool {
        if out.len() == want {
            break;
        }
        if out.iter().all(|d| oracle::part(m, d, j).disjoint(&oracle::part(m, &q, j))) {
            out.push(q);
        }
    }
    out
}

/// For random families `D` with disjoint `j`-tiles and every `i ≠ j`: the
/// restricted collection matches its definition, and for all `P`, `Q ∈ D`
/// with `P_i ∩ Q_j ≠ ∅`, `ω_{Q_j} ⊆ ω_{P_i}` iff `P` is in it.
pub fn biest_families(m: u32, families: usize, seed: u64) -> Result<BatteryReport> {
    let grid = AmbientGrid::new(m)?;
    let all = enumerate_quartiles(&grid);
    let mut rep = BatteryReport::new("biest-restriction");
    for t in 0..families {
        let mut rng = trial_rng(seed, t);
        let j = rng.gen_range(1..=3);
        let d = disjoint_family(&mut rng, &all, j, m);
        for i in (1..=3).filter(|&i| i != j) {
            let fast = biest_restriction(&all, &d, i, j)?;
            let defn: Vec<Quartile> = all
                .iter()
                .filter(|p| d.iter().any(|q| oracle::part(m, p, i).le(&oracle::part(m, q, j))))
                .copied()
                .collect();
            rep.case(fast == defn, || format!("family {t} i={i} j={j}: restriction differs from its definition"));
            let iff = all.iter().all(|p| {
                let member = defn.contains(p);
                d.iter().all(|q| {
                    let (pi, qj) = (oracle::part(m, p, i), oracle::part(m, q, j));
                    pi.disjoint(&qj) || (pi.w0 <= qj.w0 && qj.w1 <= pi.w1) == member
                })
            });
            rep.case(iff, || format!("family {t} i={i} j={j}: equivalence fails"));
        }
    }
    Ok(rep.note(format!("M={m} families={families}")))
}

/// Fast evaluators against exhaustive enumeration on small random instances.
pub fn oracle_equivalence(m: u32, instances: usize, max_quartiles: usize, seed: u64) -> Result<BatteryReport> {
    let grid = AmbientGrid::new(m)?;
    let mut rep = BatteryReport::new("oracle-equivalence");
    let mut gaps = 0usize;
    for t in 0..instances {
        let mut rng = trial_rng(seed, t);
        let (q, p, n) = if rng.gen_bool(0.5) {
            let sc = scene(&mut rng, m);
            let q = scene_collection(&mut rng, &grid, &sc, 1, max_quartiles, false);
            let p = scene_collection(&mut rng, &grid, &sc, 1, max_quartiles, false);
            (q, p, sc.n)
        } else {
            let q = collection_between(&mut rng, &grid, 1, max_quartiles);
            let p = collection_between(&mut rng, &grid, 1, max_quartiles);
            (q, p, random_choice(&mut rng, m))
        };
        if q.is_empty() {
            continue;
        }
        let (f, g) = (rich_function(&mut rng, m), rich_function(&mut rng, m));
        let (qs, ps) = (q.members(), p.members());
        let label = |what: &str| format!("instance {t}: {what}");

        for j in 1..=3 {
            let seq = analyze(&f, &q, &[j])?;
            let coeffs = oracle::coefficients(&f, qs, j);
            let s = size_scalar(&seq, &q, j)?;
            let so = oracle::size_sq(m, qs, &coeffs, j, Tops::Ambient);
            rep.case(s == so, || label(&format!("size_{j}² {s} vs {so}")));
            let e = energy_scalar(&seq, &q, j)?;
            let eo = oracle::energy_sq(m, qs, &coeffs, j);
            rep.case(e == eo, || label(&format!("energy_{j}² {e} vs {eo}")));
        }
        for (domain, tops) in [(Domain::Ambient, Tops::Ambient), (Domain::Collection, Tops::Collection)] {
            let s = b_size_in(&f, &n, &q, domain)?;
            let so = oracle::b_size(&f, &n, qs, tops);
            rep.case(s == so, || label(&format!("b-size ({domain:?}) {s} vs {so}")));
            let s = size_prime_in(&f, &g, &n, &q, &p, domain)?;
            let so = oracle::size_prime(&f, &g, &n, qs, ps, tops);
            rep.case(s == so, || label(&format!("size' ({domain:?}) {s} vs {so}")));
        }
        let e = b_energy(&f, &n, &q)?;
        let eo = oracle::b_energy(&f, &n, qs);
        rep.case(e == eo, || label(&format!("b-energy {e} vs {eo}")));
        let e = energy_prime(&f, &g, &n, &q, &p)?;
        let eo = oracle::energy_prime(&f, &g, &n, qs, ps);
        rep.case(e == eo, || label(&format!("energy' {e} vs {eo}")));

        let s = size_doubleprime(&f, &g, &q, &p, DoublePrimeMode::Exhaustive)?;
        let so = oracle::size_doubleprime(&f, &g, qs, ps);
        rep.case(s.value == so, || label(&format!("size'' {} vs {so}", s.value)));
        let e = energy_doubleprime(&f, &g, &q, &p, DoublePrimeMode::Exhaustive)?;
        let eo = oracle::energy_doubleprime_sq(&f, &g, qs, ps);
        rep.case(e.value == eo, || label(&format!("energy''² {} vs {eo}", e.value)));
        let lower = energy_doubleprime(&f, &g, &q, &p, DoublePrimeMode::MaximalTree)?;
        rep.case(lower.value <= e.value, || label("maximal-tree energy'' exceeds the exhaustive value"));
        let lower = size_doubleprime(&f, &g, &q, &p, DoublePrimeMode::MaximalTree)?;
        rep.case(lower.value <= s.value, || label("maximal-tree size'' exceeds the exhaustive value"));
        gaps += usize::from(lower.value < s.value);
    }
    Ok(rep.note(format!("M={m} instances={instances} max_quartiles={max_quartiles} maximal_tree_gaps={gaps}")))
}

/// Brute-force and min-cut antichains agree with each other and with the
/// oracle on random posets of tiles, and their witnesses are antichains.
pub fn antichain_equivalence(posets: usize, max_items: usize, seed: u64) -> Result<BatteryReport> {
    let grid = AmbientGrid::new(2)?;
    let tiles = enumerate_tiles(&grid);
    let mut rep = BatteryReport::new("antichain-brute-vs-mincut");
    for t in 0..posets {
        let mut rng = trial_rng(seed, t);
        let size = rng.gen_range(0..=max_items);
        let items: Vec<Tile> = tiles.choose_multiple(&mut rng, size).copied().collect();
        let weights: Vec<QuadExt> =
            (0..size).map(|_| if rng.gen_bool(0.15) { QuadExt::zero() } else { QuadExt::new(rng.gen_range(1..=9), 0, 0) }).collect();
        let prob = AntichainProblem::new(items.clone(), weights.clone())?;
        let brute = max_weight_antichain(&prob, AntichainMode::Brute);
        let cut = max_weight_antichain(&prob, AntichainMode::MinCut);
        let blocks: Vec<oracle::Block> = items.iter().map(|x| oracle::tile_block(2, x)).collect();
        let exact = oracle::antichain_max(&blocks, &weights);
        let valid = |w: &[usize], value: &QuadExt| {
            w.iter().enumerate().all(|(s, &a)| w[s + 1..].iter().all(|&b| tiles_disjoint(&items[a], &items[b])))
                && w.iter().map(|&a| weights[a].clone()).sum::<QuadExt>() == *value
        };
        let ok = brute.value == cut.value && cut.value == exact && valid(&brute.witness, &brute.value) && valid(&cut.witness, &cut.value);
        rep.case(ok, || format!("poset {t}: brute {} mincut {} oracle {exact}", brute.value, cut.value));
    }
    Ok(rep.note(format!("posets={posets} max_items={max_items}")))
}

/// Inputs for one decomposition run, owned so that [`Functional`] can borrow them.
struct DecompInputs {
    q: TileCollection,
    p: TileCollection,
    f: StepFunction,
    g: StepFunction,
    n: ChoiceFunction,
}

fn decomp_inputs(rng: &mut impl Rng, grid: &AmbientGrid, hi: usize) -> DecompInputs {
    let m = grid.m();
    let sc = scene(rng, m);
    let base = scene_collection(rng, grid, &sc, 1, hi, false);
    let q = upward_closure(rng, grid, &base, hi);
    let p = scene_collection(rng, grid, &sc, 1, hi, false);
    let f = crate::gen::x_function(rng, &sc.sets[0], 0.0);
    let g = if rng.gen_bool(0.5) { rich_function(rng, m) } else { crate::gen::x_function(rng, &sc.sets[2], 0.0) };
    DecompInputs { q, p, f, g, n: sc.n }
}

/// Adds, for some members, a quartile whose sub-bitile lies strictly above
/// theirs, so that collection witnesses exist.
fn upward_closure(rng: &mut impl Rng, grid: &AmbientGrid, coll: &TileCollection, hi: usize) -> TileCollection {
    let mut members = coll.members().to_vec();
    for q in coll.iter() {
        if members.len() >= hi || rng.gen_bool(0.5) {
            continue;
        }
        let above = bitiles_above(&q.p12(), grid);
        if let Some(b) = above.choose(rng) {
            members.push(Quartile::new(b.k(), b.n(), b.l() / 2));
        }
    }
    coll.with_members(members)
}

/// Attempts per run at drawing an instance whose size is not zero.
const ATTEMPTS: usize = 40;

/// The four selections, by name.
pub const FUNCTIONALS: [&str; 4] = ["size", "bsize", "prime", "doubleprime"];

fn functional<'a>(name: &str, inp: &'a DecompInputs, j: usize) -> Functional<'a> {
    match name {
        "size" => Functional::Size { coll: &inp.q, j, f: &inp.f },
        "bsize" => Functional::BSize { coll: &inp.q, g: &inp.f, n: &inp.n },
        "prime" => Functional::Prime { q_coll: &inp.q, p_coll: &inp.p, f1: &inp.f, f3: &inp.g, n: &inp.n },
        _ => Functional::DoublePrime { q_coll: &inp.q, p_coll: &inp.p, g: &inp.f, h: &inp.g },
    }
}

/// An instance whose size and energy are both positive, if one turns up
/// within [`ATTEMPTS`] draws.
fn draw_nonzero(
    rng: &mut impl Rng,
    grid: &AmbientGrid,
    name: &str,
    opts: &DecomposeOptions,
) -> Result<Option<(DecompInputs, usize, QuadExt, QuadExt)>> {
    for _ in 0..ATTEMPTS {
        let inp = decomp_inputs(rng, grid, collection_cap(grid.m(), name));
        let j = rng.gen_range(1..=3);
        let which = functional(name, &inp, j);
        let e_sq = which.reference_sq()?;
        let s_sq = which.size_sq(which.collection(), opts)?;
        if !s_sq.is_zero() && !e_sq.is_zero() {
            return Ok(Some((inp, j, e_sq, s_sq)));
        }
    }
    Ok(None)
}

/// Largest `n` with `s² ≤ 2^{-2n} E²`.
fn start_level(s_sq: &QuadExt, e_sq: &QuadExt) -> i32 {
    let mut n = ((e_sq.to_f64() / s_sq.to_f64()).log2() / 2.0).floor() as i32;
    while *s_sq > e_sq.scale_pow2(-2 * n) {
        n -= 1;
    }
    while *s_sq <= e_sq.scale_pow2(-2 * (n + 1)) {
        n += 1;
    }
    n
}

fn collection_cap(m: u32, name: &str) -> usize {
    match (m, name) {
        (_, "doubleprime") => 12,
        (3, _) => 24,
        _ => 40,
    }
}

/// One selection per run at the largest admissible `n`: the remainder's size
/// is re-measured and compared exactly with `2^{-n-1} E`, and the forest's
/// total top length with `C₀ 2^{κn}`.
pub fn decomposition_certificates(name: &str, ms: &[u32], runs: usize, seed: u64) -> Result<BatteryReport> {
    let opts = DecomposeOptions::default();
    let mut rep = BatteryReport::new(&format!("decomposition-{name}"));
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for &m in ms {
        let grid = AmbientGrid::new(m)?;
        for t in 0..runs {
            let mut rng = trial_rng(seed ^ u64::from(m) << 40, t);
            let Some((inp, j, e_sq, s_sq)) = draw_nonzero(&mut rng, &grid, name, &opts)? else {
                skipped += 1;
                continue;
            };
            let which = functional(name, &inp, j);
            let n = start_level(&s_sq, &e_sq);
            let dec = match which.decompose(which.collection(), n, &e_sq, &opts) {
                Ok(d) => d,
                Err(e) => {
                    rep.case(false, || format!("M={m} run {t} n={n}: {e}"));
                    continue;
                }
            };
            let cert = &dec.certificate;
            let remeasured = which.size_sq(&dec.remainder, &opts)?;
            let size_ok = remeasured <= e_sq.scale_pow2(-2 * n - 2) && cert.size_ok;
            let disjoint_ok = cert.disjoint_ok.unwrap_or(true);
            let kept: usize = dec.remainder.len() + dec.selected().len();
            let partition_ok = kept == which.collection().len();
            rep.case(size_ok && cert.trees_ok && disjoint_ok && partition_ok, || {
                format!(
                    "M={m} run {t} n={n}: size_ok={size_ok} trees={}≤{} disjoint={disjoint_ok} partition={partition_ok}",
                    cert.tree_sum, cert.tree_bound
                )
            });
            worst = worst.max(cert.tree_constant(opts.c0));
        }
    }
    Ok(rep.note(format!("runs={runs} M={ms:?} C0={} max_empirical_C={worst:.3} zero_size_runs={skipped}", opts.c0)))
}

/// Iterated selections: the levels partition the input exactly and every
/// per-level bound is certified.
pub fn partition_corollary(name: &str, m: u32, runs: usize, seed: u64) -> Result<BatteryReport> {
    let opts = DecomposeOptions::default();
    let grid = AmbientGrid::new(m)?;
    let mut rep = BatteryReport::new(&format!("partition-{name}"));
    let mut levels = 0;
    let mut skipped = 0;
    for t in 0..runs {
        let mut rng = trial_rng(seed, t);
        let Some((inp, j, _, _)) = draw_nonzero(&mut rng, &grid, name, &opts)? else {
            skipped += 1;
            continue;
        };
        let which = functional(name, &inp, j);
        let part = match full_partition(&which, &opts) {
            Ok(p) => p,
            Err(e) => {
                rep.case(false, || format!("run {t}: {e}"));
                continue;
            }
        };
        levels += part.levels.len();
        let (exact, certified) = (part.partitions(which.collection()), part.certified());
        rep.case(exact && certified, || format!("run {t}: partitions={exact} certified={certified}"));
    }
    Ok(rep.note(format!("M={m} runs={runs} levels={levels} zero_size_runs={skipped}")))
}

/// All four decomposition batteries merged.
pub fn all_decompositions(ms: &[u32], runs: usize, seed: u64) -> Result<BatteryReport> {
    let mut out = BatteryReport::new("decomposition-certificates");
    for name in FUNCTIONALS {
        out = out.merge(decomposition_certificates(name, ms, runs, seed)?);
    }
    Ok(out)
}

/// All four partition batteries merged.
pub fn all_partitions(m: u32, runs: usize, seed: u64) -> Result<BatteryReport> {
    let mut out = BatteryReport::new("partition-corollaries");
    for name in FUNCTIONALS {
        out = out.merge(partition_corollary(name, m, runs, seed)?);
    }
    Ok(out)
}
