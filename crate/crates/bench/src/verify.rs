//! Invariant checks over a written log.

use kmedo_core::{outlier_threshold, widened_budget, ZMode};

use crate::error::Result;
use crate::experiment::{run_experiment, z_schedule, BaselineSpec, ExperimentSpec};
use crate::log::StepLogRow;

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub t: usize,
    pub what: String,
}

/// Working budget `z'` after each of `n` arrivals, as the driver sets it.
fn budgets(spec: &ExperimentSpec, n: usize) -> Vec<usize> {
    let z = spec.config.z;
    match spec.config.z_mode {
        ZMode::Static => vec![z; n],
        ZMode::Incremental { epsilon_z } => {
            let mut z_prime = widened_budget(0, epsilon_z);
            (1..=n)
                .map(|t| {
                    let zt = z_schedule(t, n, z);
                    if zt > z_prime {
                        z_prime = widened_budget(zt, epsilon_z);
                    }
                    z_prime
                })
                .collect()
        }
    }
}

/// Checks that need only the log and the configuration: step numbering,
/// recourse prefix sums, penalty doubling, outlier thresholds and lazy
/// steps doing no swaps.
pub fn check_rows(rows: &[StepLogRow], spec: &ExperimentSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |t: usize, what: String| out.push(Violation { t, what });
    let z_primes = budgets(spec, rows.len());
    let mut total = 0;
    let mut prev: Option<&StepLogRow> = None;
    for (i, r) in rows.iter().enumerate() {
        if r.t != i + 1 {
            flag(r.t, format!("expected step {}", i + 1));
        }
        total += r.recourse_step;
        if r.recourse_total != total {
            flag(r.t, format!("recourse_total {} but steps sum to {total}", r.recourse_total));
        }
        if let Some(q) = prev {
            if r.stage < q.stage {
                flag(r.t, "stage went down".into());
            } else if r.p != q.p * 2f64.powi((r.stage - q.stage) as i32) {
                flag(r.t, format!("penalty {} does not match {} doublings of {}", r.p, r.stage - q.stage, q.p));
            }
        }
        let threshold = outlier_threshold(&spec.config, z_primes[i]);
        if r.outliers as f64 > threshold {
            flag(r.t, format!("{} outliers above the threshold {threshold}", r.outliers));
        }
        if r.lazy_skipped && r.swaps > 0 {
            flag(r.t, "swaps on a skipped step".into());
        }
        if r.ratio.is_some() != r.baseline_cost.is_some() {
            flag(r.t, "ratio and baseline disagree on presence".into());
        }
        prev = Some(r);
    }
    out
}

/// [`check_rows`] plus a fresh run of `spec` (without the baseline) whose
/// engine columns must match the log exactly.
pub fn verify(rows: &[StepLogRow], spec: &ExperimentSpec) -> Result<Vec<Violation>> {
    let mut violations = check_rows(rows, spec);
    let rerun = run_experiment(&ExperimentSpec { baseline: BaselineSpec::None, ..spec.clone() })?;
    if rerun.rows.len() != rows.len() {
        violations.push(Violation {
            t: rows.len(),
            what: format!("log has {} steps, the rerun {}", rows.len(), rerun.rows.len()),
        });
    }
    for (logged, fresh) in rows.iter().zip(&rerun.rows) {
        let a = StepLogRow { baseline_cost: None, ratio: None, ..logged.clone() };
        if &a != fresh {
            violations.push(Violation { t: logged.t, what: format!("rerun differs: {fresh:?}") });
            break;
        }
    }
    Ok(violations)
}
