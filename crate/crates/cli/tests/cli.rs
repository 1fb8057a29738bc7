use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wtf_core::dyadic::{AmbientGrid, StepFunction};
use wtf_core::tiles::{enumerate_quartiles, Quartile, Rect, TileCollection};
use wtf_core::wavepacket::walsh_function;

fn wtf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wtf")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = wtf(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_json<T: serde::Serialize>(p: &Path, v: &T) {
    fs::write(p, serde_json::to_string(v).unwrap()).unwrap();
}

fn read_step(p: &Path) -> StepFunction {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn single_quartile(dir: &Path) -> PathBuf {
    let grid = AmbientGrid::new(2).unwrap();
    let p = path(dir, "tiles.json");
    write_json(&p, &TileCollection::new(&grid, vec![Quartile::new(0, 0, 0)]).unwrap());
    p
}

#[test]
fn eval_walsh_zero_is_the_unit_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "w0.json");
    ok(&["eval-walsh", "--l", "0", "--out", s(&out)]);
    let f = read_step(&out);
    assert_eq!(f.m(), 4);
    assert_eq!(f, walsh_function(0, 4).unwrap());
    assert_eq!(f.cells().len(), 1);
}

#[test]
fn step_function_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "w5.json");
    ok(&["eval-walsh", "--l", "5", "--M", "3", "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let f: StepFunction = serde_json::from_str(&text).unwrap();
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&f).unwrap()), text);
}

#[test]
fn packet_of_the_unit_tile_is_the_unit_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.json");
    ok(&["packet", "--k", "0", "--n", "0", "--l", "0", "--M", "2", "--out", s(&out)]);
    assert_eq!(read_step(&out), walsh_function(0, 2).unwrap());
}

#[test]
fn bht_on_a_single_quartile() {
    let dir = tempfile::tempdir().unwrap();
    let tiles = single_quartile(dir.path());
    let (f1, f2, out) = (path(dir.path(), "f1.json"), path(dir.path(), "f2.json"), path(dir.path(), "out.json"));
    write_json(&f1, &walsh_function(0, 2).unwrap());
    write_json(&f2, &walsh_function(1, 2).unwrap());
    ok(&["apply", "bht", "--tiles", s(&tiles), "--f1", s(&f1), "--f2", s(&f2), "--out", s(&out)]);
    assert_eq!(read_step(&out), walsh_function(2, 2).unwrap());
}

#[test]
fn apply_needs_a_choice_function_for_carleson() {
    let dir = tempfile::tempdir().unwrap();
    let tiles = single_quartile(dir.path());
    let f1 = path(dir.path(), "f1.json");
    write_json(&f1, &walsh_function(0, 2).unwrap());
    let out = wtf(&["apply", "carleson", "--tiles", s(&tiles), "--f1", s(&f1), "--out", s(&path(dir.path(), "o.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--N"));
}

#[test]
fn size_of_the_first_packet_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let tiles = single_quartile(dir.path());
    let f = path(dir.path(), "f.json");
    write_json(&f, &walsh_function(0, 2).unwrap());
    let out = ok(&["norm", "size", "--tiles", s(&tiles), "--f1", s(&f), "--j", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["functional"], "size");
    assert_eq!(v["squared"], true);
    assert_eq!(v["approx"], 1.0);
    assert_eq!(v["value"]["a"], "1");
}

#[test]
fn decompose_partitions_and_draws() {
    let dir = tempfile::tempdir().unwrap();
    let grid = AmbientGrid::new(2).unwrap();
    let tiles = path(dir.path(), "all.json");
    let quartiles: Vec<Quartile> = enumerate_quartiles(&grid).into_iter().filter(|q| q.k() >= 0).collect();
    write_json(&tiles, &TileCollection::new(&grid, quartiles).unwrap());
    let f = path(dir.path(), "f.json");
    write_json(&f, &walsh_function(3, 2).unwrap().add(&walsh_function(0, 2).unwrap()).unwrap());
    let (report, svg) = (path(dir.path(), "report.json"), path(dir.path(), "trees.svg"));
    ok(&["decompose", "--which", "size", "--tiles", s(&tiles), "--f1", s(&f), "--report", s(&report), "--svg", s(&svg)]);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(!doc["partition"]["levels"].as_array().unwrap().is_empty());
    let drawing = fs::read_to_string(&svg).unwrap();
    assert!(drawing.starts_with("<svg"));

    let plotted = path(dir.path(), "plot.svg");
    ok(&["plot", "--tiles", s(&tiles), "--trees", s(&report), "--out", s(&plotted)]);
    assert_eq!(fs::read(&plotted).unwrap(), drawing.as_bytes());
}

#[test]
fn plot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let tiles = single_quartile(dir.path());
    let (a, b) = (path(dir.path(), "a.svg"), path(dir.path(), "b.svg"));
    ok(&["plot", "--tiles", s(&tiles), "--out", s(&a)]);
    ok(&["plot", "--tiles", s(&tiles), "--out", s(&b)]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(fs::read(&b).unwrap(), text.as_bytes());
    // Background plus one rectangle per tile.
    assert_eq!(text.matches("<rect").count(), 2);
}

#[test]
fn verify_bessel_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (r1, r2, csv) = (path(dir.path(), "r1.json"), path(dir.path(), "r2.json"), path(dir.path(), "r.csv"));
    let args = ["verify", "--target", "bessel", "--M", "3", "--trials", "200", "--seed", "1"];
    let out = wtf(&[&args[..], &["--report", s(&r1), "--csv", s(&csv)]].concat());
    assert_eq!(out.status.code(), Some(0));
    ok(&[&args[..], &["--report", s(&r2)]].concat());
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 201);
}

#[test]
fn verify_exits_two_against_a_tighter_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let baseline = serde_json::json!({"target": "size-bound", "M": 3, "params": "", "max_ratio": 1e-9, "seed": 0, "trials": 1});
    write_json(&path(dir.path(), "size-bound__M3.json"), &baseline);
    let out = wtf(&["verify", "--target", "size-bound", "--M", "3", "--trials", "50", "--seed", "3", "--baselines", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL"));
}

#[test]
fn verify_honours_the_baseline_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let baseline = serde_json::json!({"target": "size-bound", "M": 3, "params": "", "max_ratio": 1e-9, "seed": 0, "trials": 1});
    write_json(&path(dir.path(), "size-bound__M3.json"), &baseline);
    let out = Command::new(env!("CARGO_BIN_EXE_wtf"))
        .args(["verify", "--target", "size-bound", "--M", "3", "--trials", "50", "--seed", "3"])
        .env("WTF_BASELINE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_runs_identities_and_restricted_experiments() {
    ok(&["verify", "--target", "carleson-duality", "--M", "2", "--trials", "5", "--seed", "4"]);
    ok(&["verify", "--target", "restricted-lambda-prime", "--param", "vertex=A2", "--M", "3", "--trials", "5", "--seed", "4"]);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(wtf(&["verify", "--target", "bessel", "--M", "3", "--trials", "5"]).status.code(), Some(1));
    assert_eq!(wtf(&["verify", "--target", "no-such-target", "--trials", "5", "--seed", "1"]).status.code(), Some(1));
    assert_eq!(wtf(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(wtf(&["--help"]).status.code(), Some(0));
}
