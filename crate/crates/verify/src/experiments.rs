//! Restricted-type experiments near the vertices and the Hölder scaling
//! experiment for the bi-Carleson operator.

use rand::Rng;
use rayon::prelude::*;
use wtf_core::dyadic::{cells_for, exceptional_set_auto, AmbientGrid, ChoiceFunction, DyadicInterval, Exponent, Region, StepFunction};
use wtf_core::num::{DyadicRational, QuadExt};
use wtf_core::operators::{carleson_quartiles, lambda_form, product_identity_diagonal, t_apply, Form};
use wtf_core::tiles::{enumerate_quartiles, Rect, TileCollection};

use crate::gen::{
    random_choice, random_window, region_in, region_on, rich_function, scene_collection, trial_rng, unit_region_on, x_function,
    Scene,
};
use crate::report::{TrialRecord, VerificationReport};
use crate::tuples::{AdmissibleTuple, Vertex};
use crate::{Result, VerifyError};

/// Which of the two model forms an experiment drives.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModelForm {
    LambdaPrime,
    LambdaDoublePrime,
}

impl ModelForm {
    pub fn id(&self) -> &'static str {
        match self {
            ModelForm::LambdaPrime => "lambda-prime",
            ModelForm::LambdaDoublePrime => "lambda-double-prime",
        }
    }

    fn core(&self) -> Form {
        match self {
            ModelForm::LambdaPrime => Form::LambdaPrime,
            ModelForm::LambdaDoublePrime => Form::LambdaDoublePrime,
        }
    }
}

impl std::str::FromStr for ModelForm {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda-prime" | "prime" => Ok(ModelForm::LambdaPrime),
            "lambda-double-prime" | "double-prime" => Ok(ModelForm::LambdaDoublePrime),
            _ => Err(VerifyError::Parameter(format!("unknown form {s}"))),
        }
    }
}

/// Which collections the exceptional set prunes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Prune {
    Q,
    PAndQ,
}

/// The workflow for a supported pair: the set normalized to measure one and
/// replaced by its major subset, and the pruned collections.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
struct Workflow {
    designated: usize,
    prune: Prune,
}

fn workflow(form: ModelForm, vertex: Vertex) -> Result<Workflow> {
    let unsupported = || VerifyError::Unsupported(format!("{} at {vertex}", form.id()));
    match form {
        ModelForm::LambdaPrime => match vertex {
            Vertex::M12 | Vertex::M34 | Vertex::M56 => Err(unsupported()),
            v => Ok(Workflow { designated: v.designated_index(), prune: Prune::Q }),
        },
        ModelForm::LambdaDoublePrime => match vertex {
            Vertex::M56 => Ok(Workflow { designated: 2, prune: Prune::Q }),
            Vertex::M12 | Vertex::A2 => Ok(Workflow { designated: 3, prune: Prune::PAndQ }),
            _ => Err(unsupported()),
        },
    }
}

/// One restricted-type instance after the exceptional set has been removed.
pub struct RestrictedInstance {
    pub sets: [Region; 3],
    /// `E'_j` for the designated index, `E_i` otherwise.
    pub supports: [Region; 3],
    pub omega: Region,
    pub constant: DyadicRational,
    pub f: [StepFunction; 3],
    pub p: TileCollection,
    pub q: TileCollection,
    pub n: ChoiceFunction,
}

fn restricted_instance(rng: &mut impl Rng, grid: &AmbientGrid, wf: Workflow) -> Result<RestrictedInstance> {
    let m = grid.m();
    let j = wf.designated - 1;
    let window = random_window(rng, m, 0);
    let mut sets: Vec<Region> = Vec::with_capacity(3);
    for i in 0..3 {
        sets.push(if i == j {
            unit_region_on(rng, m, &window)
        } else if rng.gen_bool(0.5) {
            region_on(rng, m, &window)
        } else {
            region_in(rng, m, &window)
        });
    }
    let sets: [Region; 3] = sets.try_into().expect("three sets");
    let ex = exceptional_set_auto(&sets, &[j])?;
    let mut supports = sets.clone();
    supports[j] = ex.majors[0].clone();
    let zero = if rng.gen_bool(0.5) { 0.0 } else { 0.25 };
    let f = [x_function(rng, &supports[0], zero), x_function(rng, &supports[1], zero), x_function(rng, &supports[2], zero)];
    let n = clustered_choice(rng, m);
    let sc = Scene { window, xi: centre_of(&n), sets: sets.clone(), n: n.clone() };
    let (mut p, mut q) = if rng.gen_bool(0.1) {
        let all = TileCollection::new(grid, enumerate_quartiles(grid))?;
        (all.clone(), all)
    } else {
        let hi = if m <= 3 { 40 } else { 80 };
        (scene_collection(rng, grid, &sc, 1, hi, false), scene_collection(rng, grid, &sc, 1, hi, false))
    };
    let outside = |x: &wtf_core::tiles::Quartile| !ex.omega.covers(&x.interval());
    q = q.filter(outside);
    if wf.prune == Prune::PAndQ {
        p = p.filter(outside);
    }
    Ok(RestrictedInstance { sets, supports, omega: ex.omega, constant: ex.constant, f, p, q, n })
}

fn clustered_choice(rng: &mut impl Rng, m: u32) -> ChoiceFunction {
    if rng.gen_bool(0.25) {
        return random_choice(rng, m);
    }
    let sc = crate::gen::scene(rng, m);
    sc.n
}

/// The most common value of `N`, used to localize collections.
fn centre_of(n: &ChoiceFunction) -> DyadicRational {
    let mut values = n.values().to_vec();
    values.sort();
    let mut best = (0, values[0].clone());
    let mut t = 0;
    while t < values.len() {
        let run = values[t..].iter().take_while(|v| **v == values[t]).count();
        if run > best.0 {
            best = (run, values[t].clone());
        }
        t += run;
    }
    best.1
}

fn measures(sets: &[Region; 3]) -> [f64; 3] {
    [sets[0].measure().to_f64(), sets[1].measure().to_f64(), sets[2].measure().to_f64()]
}

/// Whether `|E'| ≥ |E|/2` for the designated set, exactly.
fn major_ok(inst: &RestrictedInstance, designated: usize) -> bool {
    let j = designated - 1;
    inst.supports[j].measure().scale_pow2(1) >= inst.sets[j].measure()
}

fn restricted_params(alpha: &AdmissibleTuple, vertex: Vertex) -> String {
    format!("vertex={vertex},alpha={alpha}")
}

/// Runs the restricted-type workflow for `form` at the tuple adjacent to `vertex`.
pub fn restricted_type_experiment(form: ModelForm, vertex: Vertex, m: u32, trials: usize, seed: u64) -> Result<VerificationReport> {
    restricted_type_experiment_at(form, vertex, vertex.adjacent(), m, trials, seed)
}

/// As [`restricted_type_experiment`], with an explicit admissible tuple.
pub fn restricted_type_experiment_at(
    form: ModelForm,
    vertex: Vertex,
    alpha: AdmissibleTuple,
    m: u32,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let wf = workflow(form, vertex)?;
    let grid = AmbientGrid::new(m)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let inst = restricted_instance(&mut rng, &grid, wf)?;
            let [f1, f2, f3] = &inst.f;
            let value = lambda_form(form.core(), &inst.p, &inst.q, f1, f2, f3, &inst.n)?;
            let weight = alpha.weight(measures(&inst.sets));
            let rec = TrialRecord::new(t, value.abs().to_f64(), weight)
                .exact(major_ok(&inst, wf.designated))
                .detail(format!("C={} |P|={} |Q|={}", inst.constant, inst.p.len(), inst.q.len()));
            Ok((rec, inst.constant.to_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_c = outcomes.iter().map(|(_, c)| *c).fold(0.0, f64::max);
    let records: Vec<TrialRecord> = outcomes.into_iter().map(|(r, _)| r).collect();
    let nonzero = records.iter().filter(|r| r.lhs > 0.0).count();
    Ok(VerificationReport::from_records(
        &format!("restricted-{}", form.id()),
        &restricted_params(&alpha, vertex),
        m,
        seed,
        records,
    )
    .metric("max_C", max_c)
    .metric("nonzero_trials", nonzero as f64))
}

/// How `Λ''` near the midpoint `M_34` is measured.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum M34Route {
    /// `|Λ''_{P,Q}(f_1, f_2, f_3)|` itself, with the `M_12` workflow.
    Direct,
    /// `∫ C_P(f_1) C_Q(f_2) f_3 − Λ''_{Q,P}(f_2, f_1, f_3)` minus the diagonal
    /// term: the sum of the absolute values of the three pieces is recorded,
    /// and the identity is checked exactly against the direct value.
    ProductIdentity,
}

/// `Λ''` at the tuple adjacent to `M_34`, which no restricted-type workflow
/// covers directly; measured, not asserted.
pub fn m34_experiment(route: M34Route, m: u32, trials: usize, seed: u64) -> Result<VerificationReport> {
    let wf = Workflow { designated: 3, prune: Prune::PAndQ };
    let alpha = Vertex::M34.adjacent();
    let grid = AmbientGrid::new(m)?;
    let records = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let inst = restricted_instance(&mut rng, &grid, wf)?;
            let [f1, f2, f3] = &inst.f;
            let (p, q, n) = (&inst.p, &inst.q, &inst.n);
            let direct = lambda_form(Form::LambdaDoublePrime, p, q, f1, f2, f3, n)?;
            let weight = alpha.weight(measures(&inst.sets));
            let mut holds = major_ok(&inst, wf.designated);
            let lhs = match route {
                M34Route::Direct => direct.abs(),
                M34Route::ProductIdentity => {
                    let product = carleson_quartiles(p, f1, n)?.mul(&carleson_quartiles(q, f2, n)?)?.inner_product(f3)?;
                    let swapped = lambda_form(Form::LambdaDoublePrime, q, p, f2, f1, f3, n)?;
                    let diagonal = product_identity_diagonal(p, q, f1, f2, n)?.inner_product(f3)?;
                    holds &= &(&product - &swapped) - &diagonal == direct;
                    &(&product.abs() + &swapped.abs()) + &diagonal.abs()
                }
            };
            Ok(TrialRecord::new(t, lhs.to_f64(), weight).exact(holds))
        })
        .collect::<Result<Vec<_>>>()?;
    let route_id = match route {
        M34Route::Direct => "direct",
        M34Route::ProductIdentity => "product-identity",
    };
    Ok(VerificationReport::from_records(
        "restricted-lambda-double-prime-m34",
        &format!("route={route_id},{}", restricted_params(&alpha, Vertex::M34)),
        m,
        seed,
        records,
    ))
}

/// Exponents `(p_1, p_2, p_3')` with `1/p_1 + 1/p_2 = 1/p_3'`; `∞` is allowed
/// for `p_1` and `p_2`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct HolderExponents {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl HolderExponents {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
        let ok = p1 > 1.0 && p2 > 1.0 && p3 > 2.0 / 3.0 && p3.is_finite() && (inv(p1) + inv(p2) - inv(p3)).abs() < 1e-12;
        if !ok {
            return Err(VerifyError::Parameter(format!("exponents ({p1}, {p2}, {p3}) outside the admissible range")));
        }
        Ok(HolderExponents { p1, p2, p3 })
    }

    fn exponent(p: f64) -> Exponent {
        if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }

    pub fn label(&self) -> String {
        let s = |p: f64| if p.is_infinite() { "inf".to_string() } else { format!("{p}") };
        format!("{},{},{}", s(self.p1), s(self.p2), s(self.p3))
    }
}

/// Steps of the local search that sharpens each adversarial `N`.
pub const ADVERSARIAL_STEPS: usize = 40;

fn holder_ratio(exps: &HolderExponents, all: &TileCollection, f1: &StepFunction, f2: &StepFunction, n: &ChoiceFunction) -> Result<(f64, f64)> {
    let out = t_apply(all, all, f1, f2, n)?;
    let lhs = out.lp_norm(HolderExponents::exponent(exps.p3))?;
    let rhs = f1.lp_norm(HolderExponents::exponent(exps.p1))? * f2.lp_norm(HolderExponents::exponent(exps.p2))?;
    Ok((lhs, rhs))
}

/// Adversarial inputs: full collections, `f_1` the indicator of a dyadic
/// interval at the left edge, `f_2` either `f_1` or the indicator of its
/// parent. The scales and the starting constant `N` are dilation covariant, so
/// input `index` at grid `M + 1` is the dilate of input `index` at grid `M`;
/// `N` is then sharpened by a local search over dyadic blocks of cells.
fn adversarial(
    exps: &HolderExponents,
    grid: &AmbientGrid,
    all: &TileCollection,
    index: usize,
) -> Result<(StepFunction, StepFunction, ChoiceFunction)> {
    let m = grid.m() as i32;
    let s = (3 - m + (index % 5) as i32 - 2).clamp(-m, m - 1);
    let f1 = StepFunction::indicator(m as u32, &DyadicInterval::new(s, 0))?;
    let f2 = if (index / 5).is_multiple_of(2) { f1.clone() } else { StepFunction::indicator(m as u32, &DyadicInterval::new(s + 1, 0))? };
    // `N ≈ 2^{M-2} (1 + c/4)` before the search.
    let c = (index / 10) as i64;
    let top = 1i64 << (2 * m);
    let j0 = ((4 + c) << (2 * m - 2)) / 4;
    let mut values = vec![DyadicRational::new(2 * j0 + 1, m + 1); cells_for(m as u32)];
    let mut rng = trial_rng(0xad5e, index);
    let mut best = {
        let (l, r) = holder_ratio(exps, all, &f1, &f2, &ChoiceFunction::new(m as u32, values.clone())?)?;
        l / r
    };
    for _ in 0..ADVERSARIAL_STEPS {
        let mut cand = values.clone();
        let width = 1usize << rng.gen_range(0..=(2 * m) as u32);
        let start = rng.gen_range(0..cand.len() / width) * width;
        let j = rng.gen_range(0..top);
        for v in &mut cand[start..start + width] {
            *v = DyadicRational::new(2 * j + 1, m + 1);
        }
        let (l, r) = holder_ratio(exps, all, &f1, &f2, &ChoiceFunction::new(m as u32, cand.clone())?)?;
        if l / r > best {
            best = l / r;
            values = cand;
        }
    }
    Ok((f1, f2, ChoiceFunction::new(m as u32, values)?))
}

fn random_holder_input(
    rng: &mut impl Rng,
    grid: &AmbientGrid,
) -> (TileCollection, TileCollection, StepFunction, StepFunction, ChoiceFunction) {
    let m = grid.m();
    let sc = crate::gen::scene(rng, m);
    let hi = (enumerate_quartiles(grid).len() / 2).clamp(4, 120);
    let p = scene_collection(rng, grid, &sc, 1, hi, false);
    let q = scene_collection(rng, grid, &sc, 1, hi, false);
    let f1 = if rng.gen_bool(0.5) { rich_function(rng, m) } else { x_function(rng, &sc.sets[0], 0.0) };
    let f2 = if rng.gen_bool(0.5) { rich_function(rng, m) } else { x_function(rng, &sc.sets[1], 0.0) };
    (p, q, f1, f2, sc.n)
}

/// Number of adversarial inputs per grid size.
pub const ADVERSARIAL: usize = 20;

/// `‖T(f_1, f_2)‖_{p_3'} / (‖f_1‖_{p_1} ‖f_2‖_{p_2})` over a random and an
/// adversarial battery at each `M`; the report's `growth` metric is the ratio
/// of the largest maximum to the one at the first `M`.
pub fn holder_scaling_experiment(
    exps: HolderExponents,
    m_range: std::ops::RangeInclusive<u32>,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let (lo, hi) = (*m_range.start(), *m_range.end());
    let mut all_records = Vec::new();
    let mut maxima = Vec::new();
    for m in m_range {
        let grid = AmbientGrid::new(m)?;
        let all = TileCollection::new(&grid, enumerate_quartiles(&grid))?;
        let records = (0..trials + ADVERSARIAL)
            .into_par_iter()
            .map(|t| {
                let (lhs, rhs) = if t < trials {
                    let (p, q, f1, f2, n) = random_holder_input(&mut trial_rng(seed ^ ((m as u64) << 32), t), &grid);
                    let out = t_apply(&p, &q, &f1, &f2, &n)?;
                    let lhs = out.lp_norm(HolderExponents::exponent(exps.p3))?;
                    (lhs, f1.lp_norm(HolderExponents::exponent(exps.p1))? * f2.lp_norm(HolderExponents::exponent(exps.p2))?)
                } else {
                    let (f1, f2, n) = adversarial(&exps, &grid, &all, t - trials)?;
                    holder_ratio(&exps, &all, &f1, &f2, &n)?
                };
                Ok(TrialRecord::new(all_records_index(m, t), lhs, rhs).detail(format!("M={m} adversarial={}", t >= trials)))
            })
            .collect::<Result<Vec<_>>>()?;
        maxima.push((m, records.iter().map(|r| r.ratio).fold(0.0, f64::max)));
        all_records.extend(records);
    }
    let first = maxima.first().map_or(0.0, |x| x.1);
    let top = maxima.iter().map(|x| x.1).fold(0.0, f64::max);
    let growth = if first > 0.0 { top / first } else { f64::INFINITY };
    let mut report =
        VerificationReport::from_records("holder-scaling", &format!("p={},M={lo}..{hi}", exps.label()), hi, seed, all_records);
    for (m, v) in &maxima {
        report = report.metric(&format!("max_ratio_M{m}"), *v);
    }
    report = report.metric("growth", growth);
    if growth >= 1.5 {
        report = report.fail();
    }
    Ok(report)
}

/// Trial labels that stay distinct across grid sizes.
fn all_records_index(m: u32, t: usize) -> usize {
    (m as usize) * 1_000_000 + t
}

/// `Λ` of a single-quartile pair from raw packets, for hand-checkable cases.
pub fn exact_value(form: ModelForm, p: &TileCollection, q: &TileCollection, f: &[StepFunction; 3], n: &ChoiceFunction) -> Result<QuadExt> {
    Ok(lambda_form(form.core(), p, q, &f[0], &f[1], &f[2], n)?)
}
