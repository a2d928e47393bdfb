//! Offline reference cost for the ratio column.

use kmedo_core::{
    offline_bicriteria, offline_penalty_local_search_from, BicriteriaParams, Instance, MetricSpace, PointId,
    SearchParams,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineEstimate {
    /// Offset plus the distance sum after dropping the `z` farthest clients.
    pub cost: f64,
    pub medians: Vec<PointId>,
    /// Penalty the restarts ran at.
    pub penalty: f64,
}

/// Random generator for restart `r`; restarts share the seed and differ by
/// stream, so raising `restarts` only adds candidates.
fn restart_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + r as u64);
    rng
}

/// Best of `restarts` local searches on the prefix, each started from a
/// seeded shuffle of the facilities. The penalty comes from the offline
/// bicriteria solver (untruncated when `z = 0`). Every candidate is scored
/// by dropping its `z` farthest clients.
///
/// `facilities` defaults to the prefix itself.
pub fn estimate_baseline(
    space: &MetricSpace,
    facilities: Option<&[PointId]>,
    prefix: &[PointId],
    k: usize,
    z: usize,
    restarts: usize,
    seed: u64,
) -> Result<BaselineEstimate> {
    if restarts == 0 {
        return Err(BenchError::Spec("baseline needs at least one restart".into()));
    }
    let facilities = facilities.unwrap_or(prefix).to_vec();
    let instance = Instance::new(space, facilities, prefix.to_vec(), k, z)?;
    let penalty = if z == 0 {
        f64::INFINITY
    } else {
        offline_bicriteria(&instance, &BicriteriaParams { warm_start: true, ..Default::default() })?.best.penalty
    };
    let params = SearchParams::default();
    let mut best: Option<BaselineEstimate> = None;
    for r in 0..restarts {
        let mut order = instance.facilities().to_vec();
        order.shuffle(&mut restart_rng(seed, r));
        let init = &order[..k];
        let run = offline_penalty_local_search_from(&instance, init, penalty, &params, |_| 0.0)?;
        let (cost, _) = instance.cost_with_outliers(&run.solution.medians);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(BaselineEstimate { cost, medians: run.solution.medians, penalty });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Checkpoint times: every `stride` arrivals from the first one with at
/// least `k` points, plus the final arrival.
pub fn checkpoints(n: usize, k: usize, stride: usize) -> Vec<usize> {
    assert!(stride >= 1);
    let mut out: Vec<usize> = (1..=n / stride).map(|m| m * stride).filter(|&t| t >= k).collect();
    if n >= k && out.last() != Some(&n) {
        out.push(n);
    }
    out
}

/// Piecewise-linear curve through `(t, cost)` checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineCurve {
    knots: Vec<(usize, f64)>,
}

impl BaselineCurve {
    /// Knots must have strictly increasing times.
    pub fn new(knots: Vec<(usize, f64)>) -> Self {
        assert!(knots.windows(2).all(|w| w[0].0 < w[1].0), "knot times must increase");
        BaselineCurve { knots }
    }

    pub fn knots(&self) -> &[(usize, f64)] {
        &self.knots
    }

    /// Interpolated value at `t`, `None` outside the first and last knot.
    pub fn at(&self, t: usize) -> Option<f64> {
        let i = self.knots.partition_point(|&(kt, _)| kt < t);
        let &(t1, v1) = self.knots.get(i)?;
        if t1 == t {
            return Some(v1);
        }
        let &(t0, v0) = self.knots.get(i.checked_sub(1)?)?;
        let w = (t - t0) as f64 / (t1 - t0) as f64;
        Some(v0 + w * (v1 - v0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kmedo_core::oracle::brute_force_kmedo;
    use proptest::prelude::*;
    use rand::Rng;

    fn ids(r: std::ops::Range<usize>) -> Vec<PointId> {
        r.map(PointId).collect()
    }

    #[test]
    fn checkpoint_times() {
        assert_eq!(checkpoints(120, 10, 50), vec![50, 100, 120]);
        assert_eq!(checkpoints(100, 10, 50), vec![50, 100]);
        assert_eq!(checkpoints(120, 60, 50), vec![100, 120]);
        assert_eq!(checkpoints(7, 3, 50), vec![7]);
        assert_eq!(checkpoints(2, 3, 50), Vec::<usize>::new());
    }

    #[test]
    fn interpolation() {
        let c = BaselineCurve::new(vec![(50, 10.0), (100, 20.0), (120, 20.0)]);
        assert_eq!(c.at(49), None);
        assert_eq!(c.at(50), Some(10.0));
        assert_eq!(c.at(75), Some(15.0));
        assert_eq!(c.at(110), Some(20.0));
        assert_eq!(c.at(121), None);
    }

    proptest! {
        #[test]
        fn interpolant_stays_between_neighbours(vals in proptest::collection::vec(0.0f64..1e6, 2..8), t in 0usize..400) {
            let knots: Vec<(usize, f64)> = vals.iter().enumerate().map(|(i, &v)| (10 + 50 * i, v)).collect();
            let c = BaselineCurve::new(knots.clone());
            let last = knots.last().unwrap().0;
            match c.at(t) {
                None => prop_assert!(t < 10 || t > last),
                Some(v) => {
                    let i = (t - 10) / 50;
                    let (a, b) = (knots[i].1, knots[(i + 1).min(knots.len() - 1)].1);
                    prop_assert!(v >= a.min(b) - 1e-9 && v <= a.max(b) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn never_below_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let n = rng.random_range(4..=10);
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>() * 50.0, rng.random::<f64>() * 50.0]).collect();
            let space = MetricSpace::euclidean(&pts).unwrap();
            let k = rng.random_range(1..=3);
            let z = rng.random_range(0..=2);
            let est = estimate_baseline(&space, None, &ids(0..n), k, z, 3, 1).unwrap();
            let inst = Instance::facilities_are_clients(&space, ids(0..n), k, z).unwrap();
            assert!(est.cost >= brute_force_kmedo(&inst).unwrap().cost);
        }
    }

    #[test]
    fn more_restarts_never_hurt() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pts: Vec<[f64; 2]> = (0..60).map(|_| [rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0]).collect();
        let space = MetricSpace::euclidean(&pts).unwrap();
        let mut prev = f64::INFINITY;
        for restarts in 1..=6 {
            let est = estimate_baseline(&space, None, &ids(0..60), 4, 3, restarts, 77).unwrap();
            assert!(est.cost <= prev);
            prev = est.cost;
        }
    }

    #[test]
    fn prefix_shorter_than_k() {
        let space = MetricSpace::euclidean(&[[0.0], [1.0]]).unwrap();
        assert!(matches!(
            estimate_baseline(&space, None, &ids(0..2), 3, 0, 1, 0),
            Err(BenchError::Core(kmedo_core::Error::Infeasible { .. }))
        ));
    }
}
