//! Recording baselines: long runs on a dedicated seed, whose maxima become the
//! bounds that shorter runs on other seeds are judged against.

use crate::baseline::{Baseline, BaselineStore};
use crate::experiments::{m34_experiment, restricted_type_experiment, M34Route, ModelForm};
use crate::report::VerificationReport;
use crate::targets::{check_inequality, Target};
use crate::tuples::Vertex;
use crate::Result;

/// Seed reserved for calibration; acceptance runs use other seeds.
pub const CALIBRATION_SEED: u64 = 0xca11_b4a7e;

/// Grid sizes with recorded baselines for the inequality targets.
pub const TARGET_GRIDS: [u32; 2] = [3, 4];

/// Grid size of the restricted-type experiments.
pub const RESTRICTED_M: u32 = 4;

/// The supported `(form, vertex)` pairs of the restricted-type workflow.
pub const RESTRICTED_PAIRS: [(ModelForm, Vertex); 9] = [
    (ModelForm::LambdaPrime, Vertex::A1),
    (ModelForm::LambdaPrime, Vertex::A2),
    (ModelForm::LambdaPrime, Vertex::A3),
    (ModelForm::LambdaPrime, Vertex::A4),
    (ModelForm::LambdaPrime, Vertex::A5),
    (ModelForm::LambdaPrime, Vertex::A6),
    (ModelForm::LambdaDoublePrime, Vertex::M56),
    (ModelForm::LambdaDoublePrime, Vertex::M12),
    (ModelForm::LambdaDoublePrime, Vertex::A2),
];

/// Trials per calibration run. The restricted-type ratios are heavy tailed
/// (rare full collections dominate), so those runs are ten times longer.
#[derive(Copy, Clone, Debug)]
pub struct CalibrationPlan {
    pub target_trials: usize,
    pub restricted_trials: usize,
    pub seed: u64,
}

impl Default for CalibrationPlan {
    fn default() -> Self {
        CalibrationPlan { target_trials: 4000, restricted_trials: 40000, seed: CALIBRATION_SEED }
    }
}

/// Every report a calibration records, in a fixed order.
pub fn calibration_reports(plan: &CalibrationPlan) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for id in Target::IDS {
        let target = Target::with_defaults(id)?;
        for m in TARGET_GRIDS {
            out.push(check_inequality(&target, m, plan.target_trials, plan.seed)?);
        }
    }
    for (form, vertex) in RESTRICTED_PAIRS {
        out.push(restricted_type_experiment(form, vertex, RESTRICTED_M, plan.restricted_trials, plan.seed)?);
    }
    for route in [M34Route::Direct, M34Route::ProductIdentity] {
        out.push(m34_experiment(route, RESTRICTED_M, plan.restricted_trials, plan.seed)?);
    }
    Ok(out)
}

/// Runs the plan and stores one baseline per report. Reports that fail an
/// exact check are not recorded.
pub fn calibrate(store: &BaselineStore, plan: &CalibrationPlan) -> Result<Vec<Baseline>> {
    calibration_reports(plan)?.iter().filter(|r| r.exact_failures == 0).map(|r| store.record(r)).collect()
}
