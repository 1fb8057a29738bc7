//! Subcommand bodies. Each returns whether its assertions held.

use std::path::Path;

use serde_json::json;
use wtf_core::decompose::{full_partition, DecomposeOptions, Functional};
use wtf_core::dyadic::{AmbientGrid, ChoiceFunction, StepFunction};
use wtf_core::num::QuadExt;
use wtf_core::operators::{
    bht_apply, carleson_adjoint_apply, carleson_adjoint_quartiles, carleson_apply, carleson_quartiles, t_apply,
    t_double_prime_apply, t_prime_apply,
};
use wtf_core::tiles::{BitileCollection, Tile, TileCollection};
use wtf_core::treenorms::{
    b_energy, b_size_in, energy_doubleprime, energy_prime, energy_scalar, size_doubleprime, size_prime_in, size_scalar,
    DoublePrimeMode, Domain,
};
use wtf_core::wavepacket::{analyze, walsh_function, wave_packet};
use wtf_verify::baseline::BaselineStore;
use wtf_verify::calibrate::{calibration_reports, CalibrationPlan};
use wtf_verify::experiments::{
    holder_scaling_experiment, m34_experiment, restricted_type_experiment, HolderExponents, M34Route, ModelForm,
};
use wtf_verify::identities::{identity_check, Identity};
use wtf_verify::{check_inequality, Target, VerificationReport, Vertex};

use crate::io::{self, required, Result};
use crate::{svg, Command, Inputs, ModeArg, Norm, Operator, VerifyArgs, Which, WitnessArg};

pub fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::EvalWalsh { l, m, out } => {
            io::write(&out, &walsh_function(l, m)?)?;
            Ok(true)
        }
        Command::Packet { k, n, l, m, out } => {
            let grid = AmbientGrid::new(m)?;
            io::write(&out, &wave_packet(&grid, &Tile::new(k, n, l))?)?;
            Ok(true)
        }
        Command::Apply { op, inputs, out } => {
            io::write(&out, &apply(op, &inputs)?)?;
            Ok(true)
        }
        Command::Norm { which, inputs, j, witnesses, mode, out } => {
            let value = norm(which, &inputs, j, domain(witnesses), double_prime_mode(mode))?;
            match out {
                Some(path) => io::write(&path, &value)?,
                None => println!("{}", serde_json::to_string_pretty(&value)?),
            }
            Ok(true)
        }
        Command::Decompose { which, inputs, n, j, c0, witnesses, report, svg } => {
            let opts = DecomposeOptions { c0, witnesses: domain(witnesses), ..DecomposeOptions::default() };
            decompose(which, &inputs, n, j, &opts, &report, svg.as_deref())
        }
        Command::Verify(args) => verify(args),
        Command::Calibrate { seed, trials, restricted_trials, out, jobs } => {
            set_jobs(jobs)?;
            let store = out.map_or_else(BaselineStore::from_env, BaselineStore::new);
            std::fs::create_dir_all(store.dir())?;
            let plan = CalibrationPlan { target_trials: trials, restricted_trials, seed };
            let mut ok = true;
            for r in calibration_reports(&plan)? {
                println!("{}", r.summary_line());
                if r.exact_failures == 0 {
                    store.record(&r)?;
                } else {
                    ok = false;
                }
            }
            Ok(ok)
        }
        Command::Plot { tiles, out, trees } => {
            let coll: TileCollection = io::read(&tiles)?;
            let trees = match trees {
                Some(path) => svg::trees_in(&io::read_value(&path)?)?,
                None => Vec::new(),
            };
            std::fs::write(&out, svg::render(&coll, &trees))?;
            Ok(true)
        }
    }
}

fn domain(w: WitnessArg) -> Domain {
    match w {
        WitnessArg::Ambient => Domain::Ambient,
        WitnessArg::Collection => Domain::Collection,
    }
}

fn double_prime_mode(m: ModeArg) -> DoublePrimeMode {
    match m {
        ModeArg::Exhaustive => DoublePrimeMode::Exhaustive,
        ModeArg::MaximalTree => DoublePrimeMode::MaximalTree,
        ModeArg::Auto => DoublePrimeMode::Auto,
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Loaded inputs; the second collection defaults to the first.
struct Loaded {
    p: TileCollection,
    q: TileCollection,
}

impl Inputs {
    fn load(&self) -> Result<Loaded> {
        let p: TileCollection = io::read(&self.tiles)?;
        let q = match &self.tiles_q {
            Some(path) => io::read(path)?,
            None => p.clone(),
        };
        Ok(Loaded { p, q })
    }

    fn f1(&self) -> Result<StepFunction> {
        io::read(required(&self.f1, "--f1")?)
    }

    fn f2(&self) -> Result<StepFunction> {
        io::read(required(&self.f2, "--f2")?)
    }

    fn choice(&self) -> Result<ChoiceFunction> {
        io::read(required(&self.choice, "--N")?)
    }

    /// A bitile collection when the tiles file lists `bitiles`.
    fn bitiles(&self) -> Result<Option<BitileCollection>> {
        let doc = io::read_value(&self.tiles)?;
        if doc.get("bitiles").is_some() {
            Ok(Some(serde_json::from_value(doc)?))
        } else {
            Ok(None)
        }
    }
}

fn apply(op: Operator, inputs: &Inputs) -> Result<StepFunction> {
    Ok(match op {
        Operator::Carleson | Operator::CarlesonAdjoint => {
            let (f, n) = (inputs.f1()?, inputs.choice()?);
            let adjoint = matches!(op, Operator::CarlesonAdjoint);
            match inputs.bitiles()? {
                Some(b) if adjoint => carleson_adjoint_apply(&b, &f, &n)?,
                Some(b) => carleson_apply(&b, &f, &n)?,
                None if adjoint => carleson_adjoint_quartiles(&inputs.load()?.p, &f, &n)?,
                None => carleson_quartiles(&inputs.load()?.p, &f, &n)?,
            }
        }
        Operator::Bht => bht_apply(&inputs.load()?.p, &inputs.f1()?, &inputs.f2()?)?,
        Operator::Tprime | Operator::Tdoubleprime | Operator::T => {
            let c = inputs.load()?;
            let (f1, f2, n) = (inputs.f1()?, inputs.f2()?, inputs.choice()?);
            let apply = match op {
                Operator::Tprime => t_prime_apply,
                Operator::Tdoubleprime => t_double_prime_apply,
                _ => t_apply,
            };
            apply(&c.p, &c.q, &f1, &f2, &n)?
        }
    })
}

/// `squared` marks functionals reported as the square of the norm.
fn norm_value(name: &str, value: &QuadExt, squared: bool) -> serde_json::Value {
    json!({ "functional": name, "squared": squared, "value": value, "approx": value.to_f64() })
}

/// For the primed functionals `--tiles` is `P` and `--tiles-q` is `Q`.
fn norm(which: Norm, inputs: &Inputs, j: usize, witnesses: Domain, mode: DoublePrimeMode) -> Result<serde_json::Value> {
    let c = inputs.load()?;
    Ok(match which {
        Norm::Size => norm_value("size", &size_scalar(&analyze(&inputs.f1()?, &c.p, &[j])?, &c.p, j)?, true),
        Norm::Energy => norm_value("energy", &energy_scalar(&analyze(&inputs.f1()?, &c.p, &[j])?, &c.p, j)?, true),
        Norm::Bsize => norm_value("bsize", &b_size_in(&inputs.f1()?, &inputs.choice()?, &c.p, witnesses)?, false),
        Norm::Benergy => norm_value("benergy", &b_energy(&inputs.f1()?, &inputs.choice()?, &c.p)?, false),
        Norm::SizePrime => {
            let v = size_prime_in(&inputs.f1()?, &inputs.f2()?, &inputs.choice()?, &c.q, &c.p, witnesses)?;
            norm_value("size-prime", &v, false)
        }
        Norm::EnergyPrime => {
            norm_value("energy-prime", &energy_prime(&inputs.f1()?, &inputs.f2()?, &inputs.choice()?, &c.q, &c.p)?, false)
        }
        Norm::SizeDp | Norm::EnergyDp => {
            let (g, h) = (inputs.f1()?, inputs.f2()?);
            let (name, v, squared) = match which {
                Norm::SizeDp => ("size-dp", size_doubleprime(&g, &h, &c.q, &c.p, mode)?, false),
                _ => ("energy-dp", energy_doubleprime(&g, &h, &c.q, &c.p, mode)?, true),
            };
            let mut out = norm_value(name, &v.value, squared);
            out["exhaustive"] = json!(v.exhaustive);
            out
        }
    })
}

fn decompose(
    which: Which,
    inputs: &Inputs,
    n: Option<i32>,
    j: usize,
    opts: &DecomposeOptions,
    report: &Path,
    svg_out: Option<&Path>,
) -> Result<bool> {
    let c = inputs.load()?;
    let f1 = inputs.f1()?;
    let (f2, choice) = match which {
        Which::Size => (None, None),
        Which::Bsize => (None, Some(inputs.choice()?)),
        Which::Prime => (Some(inputs.f2()?), Some(inputs.choice()?)),
        Which::Doubleprime => (Some(inputs.f2()?), None),
    };
    let functional = match which {
        Which::Size => Functional::Size { coll: &c.p, j, f: &f1 },
        Which::Bsize => Functional::BSize { coll: &c.p, g: &f1, n: choice.as_ref().unwrap() },
        Which::Prime => Functional::Prime {
            q_coll: &c.q,
            p_coll: &c.p,
            f1: &f1,
            f3: f2.as_ref().unwrap(),
            n: choice.as_ref().unwrap(),
        },
        Which::Doubleprime => Functional::DoublePrime { q_coll: &c.q, p_coll: &c.p, g: &f1, h: f2.as_ref().unwrap() },
    };
    let input = functional.collection();
    let (doc, ok, trees) = match n {
        Some(n) => {
            let e_sq = functional.reference_sq()?;
            let dec = functional.decompose(input, n, &e_sq, opts)?;
            let trees: Vec<_> = dec.forest.iter().map(|t| t.members.clone()).collect();
            let ok = dec.certificate.holds();
            let doc = json!({
                "functional": functional.name(),
                "options": opts,
                "reference_sq": e_sq,
                "tree_constant": dec.certificate.tree_constant(opts.c0),
                "result": dec,
            });
            (doc, ok, trees)
        }
        None => {
            let part = full_partition(&functional, opts)?;
            let trees: Vec<_> = part.levels.iter().flat_map(|l| l.forest.iter().map(|t| t.members.clone())).collect();
            let ok = part.certified() && part.partitions(input);
            (json!({ "options": opts, "partition": part }), ok, trees)
        }
    };
    io::write(report, &doc)?;
    if let Some(path) = svg_out {
        std::fs::write(path, svg::render(input, &trees))?;
    }
    Ok(ok)
}

fn parse_params(raw: &[String]) -> Result<Vec<(String, String)>> {
    raw.iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("parameter {p:?} is not key=value").into())
        })
        .collect()
}

fn verify(a: VerifyArgs) -> Result<bool> {
    set_jobs(a.jobs)?;
    let params = parse_params(&a.params)?;
    let get = |k: &str| params.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    let store = a.baselines.clone().map_or_else(BaselineStore::from_env, BaselineStore::new);
    let id = a.target.as_str();
    let report: VerificationReport = if Target::IDS.contains(&id) {
        let target = Target::parse(id, &params)?;
        store.judge(check_inequality(&target, a.m, a.trials, a.seed)?, target.exact_bound())?
    } else if let Ok(identity) = id.parse::<Identity>() {
        identity_check(identity, a.m, a.trials, a.seed)?
    } else if let Some(form) = id.strip_prefix("restricted-").and_then(|f| f.parse::<ModelForm>().ok()) {
        let vertex: Vertex = get("vertex").ok_or("restricted targets need --param vertex=V")?.parse()?;
        store.judge(restricted_type_experiment(form, vertex, a.m, a.trials, a.seed)?, None)?
    } else if id == "restricted-lambda-double-prime-m34" {
        let route = match get("route").unwrap_or("direct") {
            "direct" => M34Route::Direct,
            "product-identity" => M34Route::ProductIdentity,
            r => return Err(format!("unknown route {r}").into()),
        };
        m34_experiment(route, a.m, a.trials, a.seed)?
    } else if id == "holder-scaling" {
        let p: Vec<f64> = get("p").unwrap_or("2:2:1").split(':').map(str::parse).collect::<std::result::Result<_, _>>()?;
        let [p1, p2, p3] = p[..] else { return Err("p needs three exponents p1:p2:p3".into()) };
        let lo: u32 = get("m-min").unwrap_or("2").parse()?;
        holder_scaling_experiment(HolderExponents::new(p1, p2, p3)?, lo..=a.m, a.trials, a.seed)?
    } else {
        return Err(format!("unknown target {id}").into());
    };
    println!("{}", report.summary_line());
    if let Some(path) = &a.report {
        report.write_json(path)?;
    }
    if let Some(path) = &a.csv {
        report.write_csv(path)?;
    }
    Ok(report.passed)
}
