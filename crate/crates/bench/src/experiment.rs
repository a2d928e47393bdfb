//! Replays a point stream through the online engine and builds the log.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use kmedo_core::{MetricSpace, OnlineConfig, OnlineState, PointId, Setting, StepReport, ZMode};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::{checkpoints, estimate_baseline, BaselineCurve};
use crate::error::{BenchError, Result};
use crate::ingest::load_points_csv;
use crate::log::StepLogRow;

/// Distance matrices are precomputed up to this many points.
pub const MATERIALIZE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaselineSpec {
    None,
    OfflineLs { restarts: usize, stride: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub input: PathBuf,
    pub columns: Vec<usize>,
    pub max_rows: usize,
    /// Candidate sites for the static-F setting, read with the same columns.
    pub facilities: Option<PathBuf>,
    /// `z` is the final outlier budget in the incremental mode.
    pub config: OnlineConfig,
    pub baseline: BaselineSpec,
    /// Multiplies every distance.
    pub scale: f64,
    /// Shuffle the loaded rows before replay.
    pub shuffle: bool,
    /// Drives the baseline restarts and the optional shuffle only.
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_rows < self.config.k {
            return Err(BenchError::Spec(format!("max_rows {} is below k = {}", self.max_rows, self.config.k)));
        }
        if let BaselineSpec::OfflineLs { restarts, stride } = self.baseline {
            if restarts == 0 || stride == 0 {
                return Err(BenchError::Spec("baseline restarts and stride must be positive".into()));
            }
        }
        match (self.config.setting, &self.facilities) {
            (Setting::StaticF, None) => Err(BenchError::Spec("the static-f setting needs --facilities".into())),
            (Setting::FEqualsC, Some(_)) => Err(BenchError::Spec("--facilities only applies to static-f".into())),
            _ => Ok(self.config.validate()?),
        }
    }
}

/// Outlier budget in force at arrival `t` of `n` when it grows linearly
/// to `z_final`.
pub fn z_schedule(t: usize, n: usize, z_final: usize) -> usize {
    (t as u128 * z_final as u128 / n as u128) as usize
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub rows: Vec<StepLogRow>,
    pub reports: Vec<StepReport>,
    /// Outlier threshold in force at the end of each step.
    pub thresholds: Vec<f64>,
    pub recourse_total: usize,
    pub baseline: Option<BaselineCurve>,
    pub engine_time: Duration,
    pub baseline_time: Duration,
}

/// Loads the data named by `spec` and runs it.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let mut points = load_points_csv(&spec.input, &spec.columns, spec.max_rows)?;
    if points.len() < spec.config.k {
        return Err(BenchError::TooFewRows { rows: points.len(), needed: spec.config.k });
    }
    if spec.shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        points.shuffle(&mut rng);
    }
    let facilities = match &spec.facilities {
        Some(path) => Some(load_points_csv(path, &spec.columns, usize::MAX)?),
        None => None,
    };
    run_on_points(&points, facilities.as_deref(), spec)
}

/// Runs `spec` on points already in memory; `spec.input`, `columns`,
/// `max_rows` and `shuffle` are ignored.
pub fn run_on_points(points: &[Vec<f64>], facilities: Option<&[Vec<f64>]>, spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let config = &spec.config;
    let n = points.len();
    if n == 0 {
        return Err(BenchError::TooFewRows { rows: 0, needed: config.k.max(1) });
    }
    let nf = facilities.map_or(0, <[_]>::len);
    let dim = points[0].len();
    let mut coords = Vec::with_capacity((nf + n) * dim);
    for p in facilities.unwrap_or(&[]).iter().chain(points) {
        if p.len() != dim {
            return Err(BenchError::Spec("points differ in dimension".into()));
        }
        coords.extend_from_slice(p);
    }
    let mut space = MetricSpace::euclidean_flat(dim, coords)?.with_scale(spec.scale)?;
    if nf + n <= MATERIALIZE_LIMIT {
        space = space.materialize();
    }
    let facility_ids: Option<Vec<PointId>> = facilities.map(|_| (0..nf).map(PointId).collect());
    let arrivals: Vec<PointId> = (nf..nf + n).map(PointId).collect();

    let incremental = matches!(config.z_mode, ZMode::Incremental { .. });
    let z_final = config.z;
    let engine_config = OnlineConfig { z: if incremental { 0 } else { z_final }, ..config.clone() };
    let z_at = |t: usize| if incremental { z_schedule(t, n, z_final) } else { z_final };

    let start = Instant::now();
    let mut state = OnlineState::new(engine_config, &space, facility_ids.clone())?;
    let mut reports = Vec::with_capacity(n);
    let mut thresholds = Vec::with_capacity(n);
    for (i, &j) in arrivals.iter().enumerate() {
        if incremental {
            state.advance_z(z_at(i + 1))?;
        }
        reports.push(state.insert(j)?);
        thresholds.push(state.outlier_threshold());
    }
    let engine_time = start.elapsed();

    let start = Instant::now();
    let baseline = match spec.baseline {
        BaselineSpec::None => None,
        BaselineSpec::OfflineLs { restarts, stride } => {
            let mut knots = Vec::new();
            for t in checkpoints(n, config.k, stride) {
                let est = estimate_baseline(&space, facility_ids.as_deref(), &arrivals[..t], config.k, z_at(t), restarts, spec.seed)?;
                knots.push((t, est.cost));
            }
            Some(BaselineCurve::new(knots))
        }
    };
    let baseline_time = start.elapsed();

    let mut total = 0;
    let rows = reports
        .iter()
        .map(|r| {
            total += r.recourse;
            let baseline_cost = baseline.as_ref().and_then(|c| c.at(r.t));
            StepLogRow {
                t: r.t,
                cost_p: r.cost_p,
                p: r.penalty,
                outliers: r.outliers,
                recourse_step: r.recourse,
                recourse_total: total,
                swaps: r.swaps,
                stage: r.stage_index,
                lazy_skipped: r.lazy_skipped,
                baseline_cost,
                ratio: baseline_cost.map(|b| r.inlier_cost / b),
            }
        })
        .collect();
    debug_assert_eq!(total, state.recourse().total());
    Ok(ExperimentOutcome {
        rows,
        reports,
        thresholds,
        recourse_total: state.recourse().total(),
        baseline,
        engine_time,
        baseline_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(config: OnlineConfig) -> ExperimentSpec {
        ExperimentSpec {
            input: PathBuf::new(),
            columns: vec![0, 1],
            max_rows: 10_000,
            facilities: None,
            config,
            baseline: BaselineSpec::None,
            scale: 1.0,
            shuffle: false,
            seed: 0,
        }
    }

    fn ring(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let a = i as f64 * 2.399;
                let r = if i % 17 == 0 { 500.0 } else { 10.0 + (i % 5) as f64 };
                vec![r * a.cos(), r * a.sin()]
            })
            .collect()
    }

    #[test]
    fn schedule() {
        assert_eq!(z_schedule(1, 2000, 40), 0);
        assert_eq!(z_schedule(50, 2000, 40), 1);
        assert_eq!(z_schedule(2000, 2000, 40), 40);
        assert_eq!(z_schedule(9999, 10_000, 200), 199);
    }

    #[test]
    fn rows_follow_reports() {
        let config = OnlineConfig { setting: Setting::FEqualsC, lazy_alpha: 0.2, ..OnlineConfig::new(3, 4) };
        let mut s = spec(config);
        s.baseline = BaselineSpec::OfflineLs { restarts: 2, stride: 20 };
        let out = run_on_points(&ring(90), None, &s).unwrap();
        assert_eq!(out.rows.len(), 90);
        assert_eq!(out.rows.last().unwrap().recourse_total, out.recourse_total);
        for (row, r) in out.rows.iter().zip(&out.reports) {
            assert_eq!(row.baseline_cost.is_some(), (20..=90).contains(&row.t));
            assert!(row.outliers as f64 <= out.thresholds[row.t - 1]);
            if let (Some(b), Some(q)) = (row.baseline_cost, row.ratio) {
                assert_eq!(q, r.inlier_cost / b);
            }
        }
        let knots = out.baseline.unwrap();
        assert_eq!(knots.knots().iter().map(|k| k.0).collect::<Vec<_>>(), vec![20, 40, 60, 80, 90]);
    }

    #[test]
    fn incremental_budget_reaches_final_z() {
        let config = OnlineConfig {
            setting: Setting::FEqualsC,
            z_mode: ZMode::Incremental { epsilon_z: 0.05 },
            ..OnlineConfig::new(3, 6)
        };
        let out = run_on_points(&ring(60), None, &spec(config)).unwrap();
        let last = out.reports.last().unwrap();
        assert!(last.z_prime >= 6);
        assert!(out.reports.windows(2).all(|w| w[0].z_prime <= w[1].z_prime));
    }

    #[test]
    fn static_f_uses_the_given_sites() {
        let config = OnlineConfig::new(2, 1);
        let mut s = spec(config);
        s.facilities = Some(PathBuf::from("unused"));
        let sites = vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]];
        let out = run_on_points(&ring(30), Some(&sites), &s).unwrap();
        assert_eq!(out.rows.len(), 30);
        assert!(s.validate().is_ok());
        s.facilities = None;
        assert!(s.validate().is_err());
    }
}
