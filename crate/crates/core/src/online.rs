//! The online engine: one arrival at a time, local search with
//! cost-proportional efficiency thresholds, and penalty doubling whenever
//! too many clients sit at the truncation cap.
//!
//! Per arrival:
//!
//! 1. (`F = C`) the point becomes a facility; while fewer than `k` medians
//!    are open it also becomes a median.
//! 2. The point joins the clients and is assigned to its nearest median.
//! 3. Optional lazy trigger: if `cost_p < (1 + alpha) * c_last` (the cost
//!    after the last local search) and the outlier count is within the
//!    threshold, nothing else happens.
//! 4. Otherwise swaps that lower `cost_p` by more than
//!    `|A| * eps * cost_p / k` are applied until none is left. If more than
//!    `(1 + 1/l)(1 + gamma) z' / (1 - eps)` clients are truncated, `p`
//!    doubles and step 4 repeats.

use crate::error::{Error, Result};
use crate::instance::{Instance, RecourseLog, Solution};
use crate::ledger::AssignmentLedger;
use crate::metric::{MetricSpace, PointId};
use crate::search::{local_search_to_optimum, SearchParams, Strategy, DEFAULT_MAX_SWAPS};

/// Where candidate medians come from.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Setting {
    /// A fixed facility set given up front.
    StaticF,
    /// Every arriving point becomes a facility.
    FEqualsC,
}

/// How the outlier budget evolves.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ZMode {
    Static,
    /// `z` may grow; the engine works with `z' in [z, (1 + epsilon_z) z]`
    /// and only moves `z'` when `z` overtakes it.
    Incremental { epsilon_z: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnlineConfig {
    pub k: usize,
    /// Outlier budget (initial budget in incremental mode).
    pub z: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub ell: usize,
    pub setting: Setting,
    pub z_mode: ZMode,
    /// 0 disables the lazy trigger.
    pub lazy_alpha: f64,
    pub strategy: Strategy,
    /// Swap cap for each local-search run.
    pub max_swaps: usize,
}

impl OnlineConfig {
    /// Pure algorithm (no lazy trigger) with `eps = 0.05`, `gamma = 1`,
    /// `l = 1` in the static-F setting.
    pub fn new(k: usize, z: usize) -> Self {
        OnlineConfig {
            k,
            z,
            epsilon: 0.05,
            gamma: 1.0,
            ell: 1,
            setting: Setting::StaticF,
            z_mode: ZMode::Static,
            lazy_alpha: 0.0,
            strategy: Strategy::FirstImprovement,
            max_swaps: DEFAULT_MAX_SWAPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.ell == 0 || self.ell > self.k {
            return bad(format!("ell = {} must lie in [1, k = {}]", self.ell, self.k));
        }
        if !(self.lazy_alpha >= 0.0 && self.lazy_alpha.is_finite()) {
            return bad(format!("lazy alpha must be non-negative, got {}", self.lazy_alpha));
        }
        if let ZMode::Incremental { epsilon_z } = self.z_mode {
            if !(epsilon_z > 0.0 && epsilon_z.is_finite()) {
                return bad(format!("epsilon_z must be positive, got {epsilon_z}"));
            }
        }
        if self.max_swaps == 0 {
            return bad("max_swaps must be positive".into());
        }
        Ok(())
    }
}

/// Starting penalty `min(1 / (10 gamma z), 0.1)`; infinite when `z = 0`.
pub fn initial_penalty(gamma: f64, z: usize) -> f64 {
    if z == 0 {
        f64::INFINITY
    } else {
        (1.0 / (10.0 * gamma * z as f64)).min(0.1)
    }
}

/// Doubling fires when more than `(1 + 1/l)(1 + gamma) z' / (1 - eps)`
/// clients are truncated.
pub fn outlier_threshold(config: &OnlineConfig, z_prime: usize) -> f64 {
    let ell = config.ell as f64;
    (1.0 + 1.0 / ell) * (1.0 + config.gamma) * z_prime as f64 / (1.0 - config.epsilon)
}

/// `floor((1 + epsilon_z) z)`, never below `z`.
pub fn widened_budget(z: usize, epsilon_z: f64) -> usize {
    (((1.0 + epsilon_z) * z as f64).floor() as usize).max(z)
}

/// What happened during one arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub t: usize,
    pub point: PointId,
    /// Increase of `cost_p` caused by assigning the new point.
    pub arrival_delta: f64,
    pub cost_p: f64,
    /// Offset plus connection cost of the non-outliers.
    pub inlier_cost: f64,
    pub penalty: f64,
    pub outliers: usize,
    pub swaps: usize,
    /// `|S_t \ S_{t-1}|`.
    pub recourse: usize,
    pub stage_index: usize,
    pub lazy_skipped: bool,
    pub z_prime: usize,
    pub epoch: usize,
    /// A local search hit the swap cap during this step.
    pub capped: bool,
}

/// Reported by [`OnlineState::advance_z`] when a new epoch starts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct EpochTransition {
    pub epoch: usize,
    pub z_prime: usize,
}

/// Single-owner state machine driving the online algorithm.
#[derive(Clone, Debug)]
pub struct OnlineState<'a> {
    config: OnlineConfig,
    ledger: AssignmentLedger<'a>,
    recourse: RecourseLog,
    t: usize,
    stage_index: usize,
    z: usize,
    z_prime: usize,
    epoch: usize,
    last_ls_cost: f64,
    snapshots: Vec<Vec<PointId>>,
}

impl<'a> OnlineState<'a> {
    /// `facilities` is required in the static-F setting and must be absent
    /// when `F = C`.
    pub fn new(config: OnlineConfig, space: &'a MetricSpace, facilities: Option<Vec<PointId>>) -> Result<Self> {
        config.validate()?;
        let z_prime = match config.z_mode {
            ZMode::Static => config.z,
            ZMode::Incremental { epsilon_z } => widened_budget(config.z, epsilon_z),
        };
        let penalty = match config.z_mode {
            ZMode::Static => initial_penalty(config.gamma, config.z),
            // z' may start at 0 and grow, so the penalty is never disabled
            ZMode::Incremental { .. } => initial_penalty(config.gamma, z_prime.max(1)),
        };
        let ledger = match (config.setting, facilities) {
            (Setting::StaticF, Some(f)) => {
                let instance = Instance::new(space, f, Vec::new(), config.k, config.z)?;
                let init = instance.facilities()[..config.k].to_vec();
                AssignmentLedger::new(&instance, &init, penalty)?
            }
            (Setting::StaticF, None) => {
                return Err(Error::InvalidConfig("the static-F setting needs a facility list".into()))
            }
            (Setting::FEqualsC, None) => AssignmentLedger::without_facilities(space, config.k, penalty)?,
            (Setting::FEqualsC, Some(_)) => {
                return Err(Error::InvalidConfig("facilities are the arrivals when F = C".into()))
            }
        };
        let last_ls_cost = ledger.cost_p();
        Ok(OnlineState {
            z: config.z,
            config,
            ledger,
            recourse: RecourseLog::new(),
            t: 0,
            stage_index: 0,
            z_prime,
            epoch: 0,
            last_ls_cost,
            snapshots: Vec::new(),
        })
    }

    pub fn config(&self) -> &OnlineConfig {
        &self.config
    }

    pub fn ledger(&self) -> &AssignmentLedger<'a> {
        &self.ledger
    }

    pub fn recourse(&self) -> &RecourseLog {
        &self.recourse
    }

    pub fn penalty(&self) -> f64 {
        self.ledger.penalty()
    }

    /// Number of completed arrivals.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn stage_index(&self) -> usize {
        self.stage_index
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn z_prime(&self) -> usize {
        self.z_prime
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn last_local_search_cost(&self) -> f64 {
        self.last_ls_cost
    }

    /// Median set after each completed step (`snapshots()[t - 1]` is `S_t`).
    pub fn snapshots(&self) -> &[Vec<PointId>] {
        &self.snapshots
    }

    pub fn outlier_threshold(&self) -> f64 {
        outlier_threshold(&self.config, self.z_prime)
    }

    fn over_threshold(&self) -> bool {
        self.ledger.count_outliers() as f64 > self.outlier_threshold()
    }

    /// Processes one arrival.
    pub fn insert(&mut self, point: PointId) -> Result<StepReport> {
        self.ledger.space().check(point)?;
        let t = self.t + 1;
        if self.config.setting == Setting::FEqualsC {
            self.ledger.add_facility(point)?;
            if self.ledger.medians().len() < self.config.k {
                self.ledger.add_median(point, &mut self.recourse, t)?;
            }
        }
        let arrival_delta = self.ledger.insert_point(point)?;
        self.t = t;

        let mut swaps = 0;
        let mut capped = false;
        let mut lazy_skipped = false;
        if self.ledger.medians().len() == self.config.k {
            let alpha = self.config.lazy_alpha;
            if alpha > 0.0 && self.ledger.cost_p() < (1.0 + alpha) * self.last_ls_cost && !self.over_threshold() {
                lazy_skipped = true;
            } else {
                let params = SearchParams {
                    ell: self.config.ell,
                    rho: 0.0,
                    strategy: self.config.strategy,
                    max_swaps: self.config.max_swaps,
                };
                let (eps, k) = (self.config.epsilon, self.config.k as f64);
                loop {
                    let outcome =
                        local_search_to_optimum(&mut self.ledger, &params, |c| eps * c / k, &mut self.recourse, t)?;
                    swaps += outcome.swaps;
                    capped |= outcome.capped;
                    if self.over_threshold() {
                        let p = self.ledger.penalty();
                        self.ledger.raise_penalty(2.0 * p)?;
                        self.stage_index += 1;
                        continue;
                    }
                    self.last_ls_cost = self.ledger.cost_p();
                    break;
                }
            }
        }
        debug_assert!(!self.over_threshold(), "outlier bound must hold after every step");
        self.snapshots.push(self.ledger.medians().to_vec());
        Ok(StepReport {
            t,
            point,
            arrival_delta,
            cost_p: self.ledger.cost_p(),
            inlier_cost: self.ledger.inlier_cost(),
            penalty: self.ledger.penalty(),
            outliers: self.ledger.count_outliers(),
            swaps,
            recourse: self.recourse.added_at(t),
            stage_index: self.stage_index,
            lazy_skipped,
            z_prime: self.z_prime,
            epoch: self.epoch,
            capped,
        })
    }

    /// Feeds arrivals in order, yielding one report per arrival.
    pub fn replay<'s, I>(&'s mut self, points: I) -> impl Iterator<Item = Result<StepReport>> + use<'s, 'a, I>
    where
        I: IntoIterator<Item = PointId>,
        I::IntoIter: 's,
    {
        points.into_iter().map(move |p| self.insert(p))
    }

    /// Updates the true outlier budget; moves `z'` to
    /// `floor((1 + epsilon_z) new_z)` once `new_z` exceeds it. The penalty is
    /// kept across epochs.
    pub fn advance_z(&mut self, new_z: usize) -> Result<Option<EpochTransition>> {
        let ZMode::Incremental { epsilon_z } = self.config.z_mode else {
            return Err(Error::UnsupportedMode("advance_z needs the incremental z mode"));
        };
        if new_z < self.z {
            return Err(Error::InvalidConfig(format!("z may only grow ({} -> {new_z})", self.z)));
        }
        self.z = new_z;
        if new_z > self.z_prime {
            self.z_prime = widened_budget(new_z, epsilon_z);
            self.epoch += 1;
            return Ok(Some(EpochTransition { epoch: self.epoch, z_prime: self.z_prime }));
        }
        Ok(None)
    }

    /// Current medians and the clients at distance `>= p` from them.
    pub fn current_solution(&self) -> Solution {
        self.ledger.solution()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> MetricSpace {
        let pts: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        MetricSpace::euclidean(&pts).unwrap()
    }

    #[test]
    fn initial_penalty_values() {
        assert_eq!(initial_penalty(1.0, 200), 0.0005);
        assert_eq!(initial_penalty(1.0, 0), f64::INFINITY);
        assert_eq!(initial_penalty(0.001, 1), 0.1);
    }

    #[test]
    fn threshold_values() {
        let mut c = OnlineConfig::new(10, 200);
        let thr = outlier_threshold(&c, 200);
        assert!((thr - 800.0 / 0.95).abs() < 1e-9);
        assert!(thr > 842.0 && thr < 842.2);
        assert_eq!(outlier_threshold(&c, 0), 0.0);
        c.epsilon = 1e-12;
        c.ell = 1_000_000_000;
        c.k = c.ell;
        assert!((outlier_threshold(&c, 10) - 20.0).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let base = OnlineConfig::new(2, 1);
        for bad in [
            OnlineConfig { k: 0, ..base.clone() },
            OnlineConfig { epsilon: 1.0, ..base.clone() },
            OnlineConfig { epsilon: 0.0, ..base.clone() },
            OnlineConfig { gamma: 0.0, ..base.clone() },
            OnlineConfig { ell: 3, ..base.clone() },
            OnlineConfig { lazy_alpha: -0.1, ..base.clone() },
            OnlineConfig { z_mode: ZMode::Incremental { epsilon_z: 0.0 }, ..base.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        assert!(base.validate().is_ok());
    }

    #[test]
    fn static_f_needs_enough_facilities() {
        let s = line(&[0.0, 1.0, 2.0]);
        let c = OnlineConfig::new(3, 1);
        assert!(matches!(
            OnlineState::new(c.clone(), &s, Some(vec![PointId(0), PointId(1)])),
            Err(Error::Infeasible { .. })
        ));
        assert!(OnlineState::new(c.clone(), &s, None).is_err());
        let fc = OnlineConfig { setting: Setting::FEqualsC, ..c };
        assert!(OnlineState::new(fc, &s, Some(vec![PointId(0)])).is_err());
    }

    #[test]
    fn first_arrival_warm_up() {
        let s = line(&[3.0, 5.0, 9.0]);
        let c = OnlineConfig { setting: Setting::FEqualsC, ..OnlineConfig::new(2, 1) };
        let mut st = OnlineState::new(c, &s, None).unwrap();
        let r = st.insert(PointId(0)).unwrap();
        assert_eq!(st.ledger().medians(), &[PointId(0)]);
        assert_eq!(r.cost_p, 0.1);
        assert_eq!(r.recourse, 1);
        assert_eq!(st.insert(PointId(0)), Err(Error::DuplicatePoint(PointId(0))));
    }

    #[test]
    fn zero_budget_never_truncates() {
        let s = line(&[0.0, 100.0, 1000.0, 5.0]);
        let c = OnlineConfig::new(1, 0);
        let mut st = OnlineState::new(c, &s, Some(vec![PointId(0)])).unwrap();
        for j in 1..4 {
            let r = st.insert(PointId(j)).unwrap();
            assert_eq!(r.penalty, f64::INFINITY);
            assert_eq!(r.outliers, 0);
        }
        assert!(st.current_solution().outliers.is_empty());
        assert_eq!(st.stage_index(), 0);
    }

    #[test]
    fn advance_z_examples() {
        let s = line(&[0.0]);
        let c = OnlineConfig {
            z: 10,
            z_mode: ZMode::Incremental { epsilon_z: 0.1 },
            ..OnlineConfig::new(1, 10)
        };
        let mut st = OnlineState::new(c, &s, Some(vec![PointId(0)])).unwrap();
        // z' starts at floor(1.1 * 10) = 11; force the documented 10 -> 12 case
        st.z_prime = 10;
        assert_eq!(st.advance_z(10).unwrap(), None);
        assert_eq!(st.advance_z(11).unwrap(), Some(EpochTransition { epoch: 1, z_prime: 12 }));
        assert_eq!(st.z_prime(), 12);
        assert!(st.advance_z(5).is_err());

        let mut fixed = OnlineState::new(OnlineConfig::new(1, 3), &s, Some(vec![PointId(0)])).unwrap();
        assert!(matches!(fixed.advance_z(4), Err(Error::UnsupportedMode(_))));
    }

    #[test]
    fn doubling_restores_outlier_bound() {
        // clients far from the single facility force doubling
        let s = line(&[0.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 110.0, 120.0]);
        let c = OnlineConfig { epsilon: 0.1, ..OnlineConfig::new(1, 1) };
        let mut st = OnlineState::new(c, &s, Some(vec![PointId(0)])).unwrap();
        let mut prev_p = st.penalty();
        for j in 1..9 {
            let r = st.insert(PointId(j)).unwrap();
            assert!(r.outliers as f64 <= st.outlier_threshold());
            let ratio = r.penalty / prev_p;
            assert_eq!(ratio, 2f64.powi(ratio.log2().round() as i32));
            prev_p = r.penalty;
        }
        assert!(st.stage_index() > 0);
        assert_eq!(st.penalty(), 0.1 * 2f64.powi(st.stage_index() as i32));
    }
}
