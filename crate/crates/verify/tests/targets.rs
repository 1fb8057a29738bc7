//! Every inequality target at M = 3 against the shipped baselines, and the
//! report plumbing around it.

use wtf_verify::baseline::BaselineStore;
use wtf_verify::calibrate::{CALIBRATION_SEED, TARGET_GRIDS};
use wtf_verify::identities::{identity_check, Identity};
use wtf_verify::{check_inequality, BaselineKey, Target, VerificationReport};

const SEED: u64 = 0x07a2_6e75;
const TRIALS: usize = 100;

#[test]
fn every_target_has_a_baseline_on_every_grid() {
    let store = BaselineStore::from_env();
    for id in Target::IDS {
        let params = Target::with_defaults(id).unwrap().params();
        for m in TARGET_GRIDS {
            let b = store.get(&BaselineKey::new(id, m, &params)).unwrap();
            let b = b.unwrap_or_else(|| panic!("no baseline for {id} at M={m}"));
            assert_eq!(b.seed, CALIBRATION_SEED);
            assert!(b.max_ratio.is_finite() && b.max_ratio >= 0.0);
        }
    }
}

#[test]
fn every_target_stays_within_its_baseline_at_m3() {
    let store = BaselineStore::from_env();
    let mut failed = Vec::new();
    for id in Target::IDS {
        let target = Target::with_defaults(id).unwrap();
        let report = check_inequality(&target, 3, TRIALS, SEED).unwrap();
        let report = store.judge(report, target.exact_bound()).unwrap();
        assert_eq!(report.trials, TRIALS);
        if !report.passed {
            failed.push(report.summary_line());
        }
    }
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn reports_are_deterministic_per_seed() {
    let target = Target::with_defaults("prime-size").unwrap();
    let a = check_inequality(&target, 3, 40, 9).unwrap();
    let b = check_inequality(&target, 3, 40, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.records, b.records);
    let c = check_inequality(&target, 3, 40, 10).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn reports_round_trip_and_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = identity_check(Identity::CarlesonDuality, 2, 12, 5).unwrap();
    assert!(report.passed);
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    report.write_json(&json).unwrap();
    report.write_csv(&csv).unwrap();
    let back: VerificationReport = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(VerificationReport { records: Vec::new(), ..report.clone() }, back);
    let rows: Vec<String> = std::fs::read_to_string(&csv).unwrap().lines().map(str::to_string).collect();
    assert_eq!(rows.len(), 13);
    assert!(rows[0].starts_with("trial,lhs,rhs,ratio,exact"));
}

#[test]
fn a_recorded_bound_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let store = BaselineStore::new(dir.path());
    let target = Target::with_defaults("size-bound").unwrap();
    let report = check_inequality(&target, 3, 30, 2).unwrap();
    store.record(&VerificationReport { max_ratio: report.max_ratio / 2.0, ..report.clone() }).unwrap();
    let judged = store.judge(report.clone(), None).unwrap();
    assert!(report.max_ratio > 0.0);
    assert!(!judged.passed);
    // An intrinsic constant takes precedence over the store.
    assert!(store.judge(report, Some(f64::INFINITY)).unwrap().passed);
}
