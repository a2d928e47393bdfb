//! Problem snapshots, solutions and recourse accounting.

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId};

/// Additive constant carried by every cost so that no optimum is zero.
pub const COST_OFFSET: f64 = 0.1;

/// A k-median-with-outliers instance `(F, C, d, k, z)`.
///
/// Facilities are kept sorted by id, which is the canonical order used for
/// initialization and swap enumeration. Clients keep their given order.
#[derive(Clone, Debug)]
pub struct Instance<'a> {
    space: &'a MetricSpace,
    facilities: Vec<PointId>,
    clients: Vec<PointId>,
    k: usize,
    z: usize,
}

impl<'a> Instance<'a> {
    pub fn new(
        space: &'a MetricSpace,
        mut facilities: Vec<PointId>,
        clients: Vec<PointId>,
        k: usize,
        z: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        for &id in facilities.iter().chain(&clients) {
            space.check(id)?;
        }
        facilities.sort_unstable();
        if let Some(w) = facilities.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0]));
        }
        if k > facilities.len() {
            return Err(Error::Infeasible { k, available: facilities.len() });
        }
        let mut seen = vec![false; space.len()];
        for &c in &clients {
            if std::mem::replace(&mut seen[c.0], true) {
                return Err(Error::DuplicatePoint(c));
            }
        }
        Ok(Instance { space, facilities, clients, k, z })
    }

    /// Instance with `F = C = ids`.
    pub fn facilities_are_clients(space: &'a MetricSpace, ids: Vec<PointId>, k: usize, z: usize) -> Result<Self> {
        Self::new(space, ids.clone(), ids, k, z)
    }

    pub fn space(&self) -> &'a MetricSpace {
        self.space
    }

    pub fn facilities(&self) -> &[PointId] {
        &self.facilities
    }

    pub fn clients(&self) -> &[PointId] {
        &self.clients
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn z(&self) -> usize {
        self.z
    }

    /// Number of clients.
    pub fn n(&self) -> usize {
        self.clients.len()
    }

    pub fn with_z(&self, z: usize) -> Self {
        Instance { z, ..self.clone() }
    }

    /// Untruncated `d(j, S)` for every client, in client order.
    pub fn distances_to(&self, medians: &[PointId]) -> Vec<f64> {
        self.clients
            .iter()
            .map(|&j| {
                medians
                    .iter()
                    .map(|&i| self.space.dist(j, i))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Cost of `medians` with the `z` farthest clients discarded, plus the
    /// offset. Among equal distances the later client is discarded first.
    /// Returns the cost and the discarded clients (sorted by id).
    pub fn cost_with_outliers(&self, medians: &[PointId]) -> (f64, Vec<PointId>) {
        let dist = self.distances_to(medians);
        let mut order: Vec<usize> = (0..dist.len()).collect();
        order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(b.cmp(&a)));
        let mut discarded = vec![false; dist.len()];
        for &c in order.iter().take(self.z) {
            discarded[c] = true;
        }
        let mut cost = COST_OFFSET;
        for (c, d) in dist.iter().enumerate() {
            if !discarded[c] {
                cost += d;
            }
        }
        let mut outliers: Vec<PointId> = order.iter().take(self.z).map(|&c| self.clients[c]).collect();
        outliers.sort_unstable();
        (cost, outliers)
    }
}

/// A set of `k` medians together with the clients declared outliers.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Sorted by id.
    pub medians: Vec<PointId>,
    /// Sorted by id.
    pub outliers: Vec<PointId>,
}

/// Medians added and removed during one time step.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RecourseStep {
    pub t: usize,
    /// `S_t \ S_{t-1}`, sorted.
    pub added: Vec<PointId>,
    /// `S_{t-1} \ S_t`, sorted.
    pub removed: Vec<PointId>,
}

/// Per-step record of median changes.
///
/// Changes within one step are netted: a median that enters and leaves
/// during the same step leaves no trace, so `added` is exactly
/// `S_t \ S_{t-1}` and the headline total is `sum_t |S_t \ S_{t-1}|`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RecourseLog {
    steps: Vec<RecourseStep>,
    total: usize,
    gross: usize,
}

impl RecourseLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records medians entering (`incoming`) and leaving (`outgoing`) at
    /// step `t`. Steps must be recorded in non-decreasing order.
    pub fn record(&mut self, t: usize, incoming: &[PointId], outgoing: &[PointId]) {
        if let Some(last) = self.steps.last() {
            assert!(last.t <= t, "recourse recorded out of order ({} after {})", t, last.t);
        }
        if self.steps.last().is_none_or(|s| s.t != t) {
            self.steps.push(RecourseStep { t, ..Default::default() });
        }
        let step = self.steps.last_mut().expect("step exists");
        let before = step.added.len();
        for &out in outgoing {
            match step.added.binary_search(&out) {
                Ok(pos) => {
                    step.added.remove(pos);
                }
                Err(_) => insert_sorted(&mut step.removed, out),
            }
        }
        for &inc in incoming {
            match step.removed.binary_search(&inc) {
                Ok(pos) => {
                    step.removed.remove(pos);
                }
                Err(_) => insert_sorted(&mut step.added, inc),
            }
        }
        self.total = self.total - before + step.added.len();
        self.gross += incoming.len();
    }

    /// `sum_t |S_t \ S_{t-1}|`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// `sum_t |S_t \ S_{t-1}| + |S_{t-1} \ S_t|`.
    pub fn two_sided_total(&self) -> usize {
        self.steps.iter().map(|s| s.added.len() + s.removed.len()).sum()
    }

    /// Medians added over all swaps, without netting within a step.
    pub fn gross_additions(&self) -> usize {
        self.gross
    }

    pub fn steps(&self) -> &[RecourseStep] {
        &self.steps
    }

    /// Net additions at step `t` (0 if nothing changed).
    pub fn added_at(&self, t: usize) -> usize {
        self.steps
            .iter()
            .rev()
            .find(|s| s.t == t)
            .map_or(0, |s| s.added.len())
    }
}

fn insert_sorted(v: &mut Vec<PointId>, id: PointId) {
    if let Err(pos) = v.binary_search(&id) {
        v.insert(pos, id);
    }
}
