//! Incremental `cost_p` bookkeeping.
//!
//! For each client the ledger caches its nearest and second-nearest median
//! under the truncated metric `d_p`. Single-swap deltas then cost one pass
//! over the clients, and applying a swap only re-minimizes the clients that
//! lost one of their two cached medians.
//!
//! Ordering is lexicographic on `(d_p, id)`: among equally distant medians
//! the smaller id is nearer. The cached total is always re-summed in client
//! order starting from the offset, so a ledger reached through any sequence
//! of updates is bit-identical to one built from scratch.

use crate::error::{Error, Result};
use crate::instance::{Instance, RecourseLog, Solution, COST_OFFSET};
use crate::metric::{MetricSpace, PointId};

const NO_SLOT: u32 = u32::MAX;

/// Nearest and second-nearest median of one client under `d_p`.
///
/// With fewer medians than needed the missing entries are `None` and their
/// distance is `p` (the truncated distance to an empty set).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Assignment {
    pub nearest: Option<PointId>,
    pub nearest_dist: f64,
    pub second: Option<PointId>,
    pub second_dist: f64,
}

impl Assignment {
    fn empty(p: f64) -> Self {
        Assignment { nearest: None, nearest_dist: p, second: None, second_dist: p }
    }

    /// Folds a median into the top two.
    #[inline]
    fn offer(&mut self, id: PointId, d: f64) {
        if precedes(d, id, self.nearest_dist, self.nearest) {
            self.second = self.nearest;
            self.second_dist = self.nearest_dist;
            self.nearest = Some(id);
            self.nearest_dist = d;
        } else if precedes(d, id, self.second_dist, self.second) {
            self.second = Some(id);
            self.second_dist = d;
        }
    }
}

#[inline]
fn precedes(d: f64, id: PointId, other_d: f64, other: Option<PointId>) -> bool {
    match other {
        None => true,
        Some(o) => d < other_d || (d == other_d && id < o),
    }
}

/// Current median set, penalty and per-client assignment caches.
#[derive(Clone, Debug)]
pub struct AssignmentLedger<'a> {
    space: &'a MetricSpace,
    k: usize,
    facilities: Vec<PointId>,
    is_facility: Vec<bool>,
    clients: Vec<PointId>,
    is_client: Vec<bool>,
    medians: Vec<PointId>,
    slot: Vec<u32>,
    assignments: Vec<Assignment>,
    penalty: f64,
    offset: f64,
    total: f64,
}

impl PartialEq for AssignmentLedger<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.space, other.space)
            && self.k == other.k
            && self.facilities == other.facilities
            && self.clients == other.clients
            && self.medians == other.medians
            && self.assignments == other.assignments
            && self.penalty.to_bits() == other.penalty.to_bits()
            && self.offset.to_bits() == other.offset.to_bits()
            && self.total.to_bits() == other.total.to_bits()
    }
}

impl<'a> AssignmentLedger<'a> {
    /// Builds the ledger for medians `medians` under penalty `p`
    /// (`f64::INFINITY` disables truncation).
    pub fn new(instance: &Instance<'a>, medians: &[PointId], p: f64) -> Result<Self> {
        Self::with_offset(instance, medians, p, COST_OFFSET)
    }

    pub fn with_offset(instance: &Instance<'a>, medians: &[PointId], p: f64, offset: f64) -> Result<Self> {
        check_penalty(p)?;
        let space = instance.space();
        let n = space.len();
        let mut is_facility = vec![false; n];
        for &f in instance.facilities() {
            is_facility[f.0] = true;
        }
        let mut sorted = medians.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSolution(format!("median {} listed twice", w[0])));
        }
        if sorted.len() > instance.k() {
            return Err(Error::InvalidSolution(format!(
                "{} medians for k = {}",
                sorted.len(),
                instance.k()
            )));
        }
        for &m in &sorted {
            space.check(m)?;
            if !is_facility[m.0] {
                return Err(Error::InvalidSolution(format!("median {m} is not a facility")));
            }
        }
        let mut ledger = AssignmentLedger {
            space,
            k: instance.k(),
            facilities: instance.facilities().to_vec(),
            is_facility,
            clients: Vec::with_capacity(instance.n()),
            is_client: vec![false; n],
            medians: sorted,
            slot: vec![NO_SLOT; n],
            assignments: Vec::with_capacity(instance.n()),
            penalty: p,
            offset,
            total: offset,
        };
        ledger.reindex_slots();
        for &j in instance.clients() {
            ledger.is_client[j.0] = true;
            ledger.clients.push(j);
            let a = ledger.top_two(j);
            ledger.assignments.push(a);
        }
        ledger.resum();
        Ok(ledger)
    }

    /// Empty ledger with no facilities, clients or medians; facilities are
    /// added as points arrive.
    pub fn without_facilities(space: &'a MetricSpace, k: usize, p: f64) -> Result<Self> {
        check_penalty(p)?;
        if k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        let n = space.len();
        Ok(AssignmentLedger {
            space,
            k,
            facilities: Vec::new(),
            is_facility: vec![false; n],
            clients: Vec::new(),
            is_client: vec![false; n],
            medians: Vec::new(),
            slot: vec![NO_SLOT; n],
            assignments: Vec::new(),
            penalty: p,
            offset: COST_OFFSET,
            total: COST_OFFSET,
        })
    }

    pub fn space(&self) -> &'a MetricSpace {
        self.space
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Current medians, sorted by id.
    pub fn medians(&self) -> &[PointId] {
        &self.medians
    }

    pub fn facilities(&self) -> &[PointId] {
        &self.facilities
    }

    pub fn clients(&self) -> &[PointId] {
        &self.clients
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn is_median(&self, id: PointId) -> bool {
        self.slot.get(id.0).is_some_and(|&s| s != NO_SLOT)
    }

    pub fn is_client(&self, id: PointId) -> bool {
        self.is_client.get(id.0).copied().unwrap_or(false)
    }

    pub fn is_facility(&self, id: PointId) -> bool {
        self.is_facility.get(id.0).copied().unwrap_or(false)
    }

    /// Position of a median in [`Self::medians`].
    pub(crate) fn slot_of(&self, id: PointId) -> Option<usize> {
        match self.slot.get(id.0) {
            Some(&s) if s != NO_SLOT => Some(s as usize),
            _ => None,
        }
    }

    /// Facilities not currently open, ascending.
    pub fn closed_facilities(&self) -> impl Iterator<Item = PointId> + '_ {
        self.facilities.iter().copied().filter(|&f| !self.is_median(f))
    }

    /// `offset + sum_j d_p(j, S)`.
    pub fn cost_p(&self) -> f64 {
        self.total
    }

    /// Number of clients whose truncated distance equals `p`; always 0
    /// when truncation is disabled.
    pub fn count_outliers(&self) -> usize {
        if self.penalty.is_infinite() {
            return 0;
        }
        self.assignments.iter().filter(|a| a.nearest_dist == self.penalty).count()
    }

    /// Clients with `d(j, S) >= p`, sorted by id.
    pub fn outliers(&self) -> Vec<PointId> {
        if self.penalty.is_infinite() {
            return Vec::new();
        }
        let mut out: Vec<PointId> = self
            .clients
            .iter()
            .zip(&self.assignments)
            .filter(|(_, a)| a.nearest_dist == self.penalty)
            .map(|(&j, _)| j)
            .collect();
        out.sort_unstable();
        out
    }

    /// Offset plus the connection cost of the clients that are not outliers.
    pub fn inlier_cost(&self) -> f64 {
        let mut cost = self.offset;
        for a in &self.assignments {
            if a.nearest_dist < self.penalty {
                cost += a.nearest_dist;
            }
        }
        cost
    }

    pub fn solution(&self) -> Solution {
        Solution { medians: self.medians.clone(), outliers: self.outliers() }
    }

    /// Exact change of `cost_p` if `outgoing` were replaced by `incoming`.
    ///
    /// Single swaps are evaluated from the nearest/second-nearest caches;
    /// the summation order matches the batched evaluation used by the local
    /// search, so both agree bit for bit.
    pub fn swap_delta(&self, incoming: &[PointId], outgoing: &[PointId]) -> Result<f64> {
        self.validate_swap(incoming, outgoing)?;
        if incoming.len() == 1 {
            let slot = self.slot_of(outgoing[0]).expect("validated");
            Ok(self.single_swap_delta(incoming[0], slot))
        } else {
            let mut slots: Vec<usize> = outgoing.iter().map(|&o| self.slot_of(o).expect("validated")).collect();
            slots.sort_unstable();
            let columns: Vec<Vec<f64>> = incoming.iter().map(|&i| self.column(i)).collect();
            let cols: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
            Ok(self.multi_swap_delta(&slots, &cols))
        }
    }

    fn validate_swap(&self, incoming: &[PointId], outgoing: &[PointId]) -> Result<()> {
        if incoming.is_empty() || incoming.len() != outgoing.len() {
            return Err(Error::InvalidSwap(format!(
                "swap sizes must match and be positive (incoming {}, outgoing {})",
                incoming.len(),
                outgoing.len()
            )));
        }
        if self.medians.len() != self.k {
            return Err(Error::InvalidSwap(format!(
                "swaps need exactly k = {} medians, have {}",
                self.k,
                self.medians.len()
            )));
        }
        for (a, &o) in outgoing.iter().enumerate() {
            if !self.is_median(o) {
                return Err(Error::InvalidSwap(format!("outgoing {o} is not a median")));
            }
            if outgoing[..a].contains(&o) {
                return Err(Error::InvalidSwap(format!("outgoing {o} repeated")));
            }
        }
        for (a, &i) in incoming.iter().enumerate() {
            if i.0 >= self.space.len() || !self.is_facility(i) {
                return Err(Error::InvalidSwap(format!("incoming {i} is not a facility")));
            }
            if self.is_median(i) {
                return Err(Error::InvalidSwap(format!("incoming {i} is already a median")));
            }
            if incoming[..a].contains(&i) {
                return Err(Error::InvalidSwap(format!("incoming {i} repeated")));
            }
        }
        Ok(())
    }

    /// `d_p(j, id)` for every client, in client order.
    pub(crate) fn column(&self, id: PointId) -> Vec<f64> {
        self.clients.iter().map(|&j| self.space.dist_p(id, j, self.penalty)).collect()
    }

    /// Deltas of `({incoming}, {medians[s]})` for every slot `s` at once.
    /// `deltas` must have length `k`.
    pub(crate) fn single_swap_deltas(&self, incoming: PointId, deltas: &mut [f64]) {
        debug_assert_eq!(deltas.len(), self.medians.len());
        deltas.fill(0.0);
        let mut shared = 0.0;
        for (&j, a) in self.clients.iter().zip(&self.assignments) {
            let d = self.space.dist_p(incoming, j, self.penalty);
            let kept = a.nearest_dist.min(d);
            shared += kept - a.nearest_dist;
            if let Some(n) = a.nearest {
                deltas[self.slot[n.0] as usize] += a.second_dist.min(d) - kept;
            }
        }
        for d in deltas.iter_mut() {
            *d += shared;
        }
    }

    fn single_swap_delta(&self, incoming: PointId, out_slot: usize) -> f64 {
        let mut shared = 0.0;
        let mut extra = 0.0;
        for (&j, a) in self.clients.iter().zip(&self.assignments) {
            let d = self.space.dist_p(incoming, j, self.penalty);
            let kept = a.nearest_dist.min(d);
            shared += kept - a.nearest_dist;
            if let Some(n) = a.nearest {
                if self.slot[n.0] as usize == out_slot {
                    extra += a.second_dist.min(d) - kept;
                }
            }
        }
        shared + extra
    }

    /// Delta of removing the medians at `out_slots` (sorted) and opening
    /// medians whose `d_p` columns are `incoming`.
    pub(crate) fn multi_swap_delta(&self, out_slots: &[usize], incoming: &[&[f64]]) -> f64 {
        let removed = |id: PointId| out_slots.binary_search(&(self.slot[id.0] as usize)).is_ok();
        let mut delta = 0.0;
        for (c, (&j, a)) in self.clients.iter().zip(&self.assignments).enumerate() {
            let mut best = match (a.nearest, a.second) {
                (Some(n), _) if !removed(n) => a.nearest_dist,
                (_, Some(s)) if !removed(s) => a.second_dist,
                _ => self
                    .medians
                    .iter()
                    .filter(|&&m| !removed(m))
                    .map(|&m| self.space.dist_p(m, j, self.penalty))
                    .fold(self.penalty, f64::min),
            };
            for col in incoming {
                best = best.min(col[c]);
            }
            delta += best - a.nearest_dist;
        }
        delta
    }

    /// Replaces `outgoing` by `incoming` and logs the change at step `t`.
    pub fn apply_swap(
        &mut self,
        incoming: &[PointId],
        outgoing: &[PointId],
        recourse: &mut RecourseLog,
        t: usize,
    ) -> Result<()> {
        self.validate_swap(incoming, outgoing)?;
        let mut medians: Vec<PointId> = self.medians.iter().copied().filter(|m| !outgoing.contains(m)).collect();
        medians.extend_from_slice(incoming);
        medians.sort_unstable();
        for &o in outgoing {
            self.slot[o.0] = NO_SLOT;
        }
        self.medians = medians;
        self.reindex_slots();
        let mut fresh: Vec<PointId> = incoming.to_vec();
        fresh.sort_unstable();
        for c in 0..self.clients.len() {
            let j = self.clients[c];
            let a = self.assignments[c];
            let lost = |m: Option<PointId>| m.is_some_and(|m| outgoing.contains(&m));
            if lost(a.nearest) || lost(a.second) || a.second.is_none() {
                self.assignments[c] = self.top_two(j);
            } else {
                let mut a = a;
                for &i in &fresh {
                    a.offer(i, self.space.dist_p(i, j, self.penalty));
                }
                self.assignments[c] = a;
            }
        }
        self.resum();
        recourse.record(t, incoming, outgoing);
        Ok(())
    }

    /// Adds client `j`, assigns it, and returns the increase of `cost_p`.
    pub fn insert_point(&mut self, j: PointId) -> Result<f64> {
        self.space.check(j)?;
        if self.is_client[j.0] {
            return Err(Error::DuplicatePoint(j));
        }
        if self.medians.is_empty() {
            return Err(Error::InvalidSolution("cannot assign a client without medians".into()));
        }
        let a = self.top_two(j);
        self.is_client[j.0] = true;
        self.clients.push(j);
        self.assignments.push(a);
        self.total += a.nearest_dist;
        Ok(a.nearest_dist)
    }

    /// Raises the penalty to `new_p` and re-minimizes every client whose
    /// cached distances were truncated.
    pub fn raise_penalty(&mut self, new_p: f64) -> Result<()> {
        check_penalty(new_p)?;
        if new_p < self.penalty {
            return Err(Error::PenaltyDecrease { current: self.penalty, requested: new_p });
        }
        if new_p == self.penalty {
            return Ok(());
        }
        let old = self.penalty;
        self.penalty = new_p;
        for c in 0..self.clients.len() {
            let a = self.assignments[c];
            if a.nearest_dist == old || a.second_dist == old {
                self.assignments[c] = self.top_two(self.clients[c]);
            }
        }
        self.resum();
        Ok(())
    }

    /// Makes `id` an available facility (it must not be one already).
    pub fn add_facility(&mut self, id: PointId) -> Result<()> {
        self.space.check(id)?;
        if self.is_facility[id.0] {
            return Err(Error::DuplicatePoint(id));
        }
        self.is_facility[id.0] = true;
        let pos = self.facilities.binary_search(&id).unwrap_err();
        self.facilities.insert(pos, id);
        Ok(())
    }

    /// Opens one more median while fewer than `k` are open.
    pub fn add_median(&mut self, id: PointId, recourse: &mut RecourseLog, t: usize) -> Result<()> {
        self.space.check(id)?;
        if self.medians.len() >= self.k {
            return Err(Error::InvalidSolution(format!("already {} medians open", self.k)));
        }
        if !self.is_facility[id.0] {
            return Err(Error::InvalidSolution(format!("median {id} is not a facility")));
        }
        if self.is_median(id) {
            return Err(Error::InvalidSolution(format!("median {id} is already open")));
        }
        let pos = self.medians.binary_search(&id).unwrap_err();
        self.medians.insert(pos, id);
        self.reindex_slots();
        for (c, &j) in self.clients.iter().enumerate() {
            let d = self.space.dist_p(id, j, self.penalty);
            self.assignments[c].offer(id, d);
        }
        self.resum();
        recourse.record(t, &[id], &[]);
        Ok(())
    }

    fn top_two(&self, j: PointId) -> Assignment {
        let mut a = Assignment::empty(self.penalty);
        for &m in &self.medians {
            a.offer(m, self.space.dist_p(m, j, self.penalty));
        }
        a
    }

    fn reindex_slots(&mut self) {
        for (s, &m) in self.medians.iter().enumerate() {
            self.slot[m.0] = s as u32;
        }
    }

    fn resum(&mut self) {
        self.total = self.assignments.iter().fold(self.offset, |acc, a| acc + a.nearest_dist);
    }
}

fn check_penalty(p: f64) -> Result<()> {
    if p.is_nan() || p < 0.0 {
        return Err(Error::InvalidConfig(format!("penalty must be non-negative, got {p}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    /// Points on a line; ids follow input order.
    fn line(xs: &[f64]) -> MetricSpace {
        let pts: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        MetricSpace::euclidean(&pts).unwrap()
    }

    fn ids(r: std::ops::Range<usize>) -> Vec<PointId> {
        r.map(PointId).collect()
    }

    #[test]
    fn build_examples() {
        // m = 0 at x=0, a = 1 at x=4
        let s = line(&[0.0, 4.0]);
        let inst = Instance::new(&s, vec![PointId(0)], vec![PointId(1)], 1, 0).unwrap();
        let l = AssignmentLedger::new(&inst, &[PointId(0)], 10.0).unwrap();
        assert_eq!(l.cost_p(), 4.1);
        let l = AssignmentLedger::new(&inst, &[PointId(0)], 3.0).unwrap();
        assert_eq!(l.cost_p(), 3.1);
        let empty = Instance::new(&s, vec![PointId(0)], vec![], 1, 0).unwrap();
        assert_eq!(AssignmentLedger::new(&empty, &[PointId(0)], 3.0).unwrap().cost_p(), 0.1);
    }

    #[test]
    fn build_rejects_non_facility() {
        let s = line(&[0.0, 4.0]);
        let inst = Instance::new(&s, vec![PointId(0)], vec![PointId(1)], 1, 0).unwrap();
        assert!(matches!(
            AssignmentLedger::new(&inst, &[PointId(1)], 1.0),
            Err(Error::InvalidSolution(_))
        ));
    }

    #[test]
    fn cost_and_outlier_counts() {
        // clients at distance 1, 2, 9 from the single median
        let s = line(&[0.0, 1.0, 2.0, 9.0]);
        let inst = Instance::new(&s, vec![PointId(0)], ids(1..4), 1, 1).unwrap();
        let l = AssignmentLedger::new(&inst, &[PointId(0)], 5.0).unwrap();
        assert_eq!(l.cost_p(), 0.1 + 1.0 + 2.0 + 5.0);
        assert!(approx(l.cost_p(), 8.1));
        assert_eq!(l.count_outliers(), 1);
        assert_eq!(l.outliers(), vec![PointId(3)]);
        assert!(approx(l.inlier_cost(), 3.1));

        let l = AssignmentLedger::new(&inst, &[PointId(0)], f64::INFINITY).unwrap();
        assert_eq!(l.count_outliers(), 0);

        let s = line(&[0.0, 5.0, -5.0, 5.0]);
        let inst = Instance::new(&s, vec![PointId(0)], ids(1..4), 1, 1).unwrap();
        let l = AssignmentLedger::new(&inst, &[PointId(0)], 5.0).unwrap();
        assert_eq!(l.count_outliers(), 3);
    }

    #[test]
    fn single_swap_example() {
        // m = 0 at x=0, m' = 1 at x=3, client at x=4
        let s = line(&[0.0, 3.0, 4.0]);
        let inst = Instance::new(&s, ids(0..2), vec![PointId(2)], 1, 0).unwrap();
        let mut l = AssignmentLedger::new(&inst, &[PointId(0)], 100.0).unwrap();
        let before = l.cost_p();
        assert_eq!(l.swap_delta(&[PointId(1)], &[PointId(0)]).unwrap(), -3.0);
        let mut log = RecourseLog::new();
        l.apply_swap(&[PointId(1)], &[PointId(0)], &mut log, 1).unwrap();
        assert!(approx(l.cost_p(), before - 3.0));
        assert_eq!(l.medians(), &[PointId(1)]);
        assert_eq!(log.total(), 1);
    }

    #[test]
    fn identical_rows_give_zero_delta() {
        // facilities 0 and 1 are at zero distance with identical rows
        let m = [
            [0.0, 0.0, 3.0, 5.0],
            [0.0, 0.0, 3.0, 5.0],
            [3.0, 3.0, 0.0, 4.0],
            [5.0, 5.0, 4.0, 0.0],
        ];
        let s = MetricSpace::explicit(&m).unwrap();
        let inst = Instance::new(&s, ids(0..2), ids(2..4), 1, 0).unwrap();
        let l = AssignmentLedger::new(&inst, &[PointId(0)], 10.0).unwrap();
        assert_eq!(l.swap_delta(&[PointId(1)], &[PointId(0)]).unwrap(), 0.0);
    }

    #[test]
    fn two_swap_counts_two() {
        let s = line(&[0.0, 1.0, 10.0, 11.0, 0.5, 10.5]);
        let inst = Instance::new(&s, ids(0..4), ids(4..6), 2, 0).unwrap();
        let mut l = AssignmentLedger::new(&inst, &[PointId(0), PointId(1)], 100.0).unwrap();
        let mut log = RecourseLog::new();
        let delta = l.swap_delta(&[PointId(2), PointId(3)], &[PointId(0), PointId(1)]).unwrap();
        let before = l.cost_p();
        l.apply_swap(&[PointId(2), PointId(3)], &[PointId(0), PointId(1)], &mut log, 1).unwrap();
        assert_eq!(log.total(), 2);
        assert!(approx(l.cost_p(), before + delta));
    }

    #[test]
    fn swap_precondition_errors() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let inst = Instance::new(&s, ids(0..3), vec![PointId(3)], 2, 0).unwrap();
        let l = AssignmentLedger::new(&inst, &[PointId(0), PointId(1)], 1.0).unwrap();
        let bad = [
            (vec![PointId(2)], vec![PointId(2)]),
            (vec![PointId(1)], vec![PointId(0)]),
            (vec![PointId(3)], vec![PointId(0)]),
            (vec![PointId(2)], vec![]),
            (vec![], vec![]),
            (vec![PointId(2), PointId(2)], vec![PointId(0), PointId(1)]),
        ];
        for (inc, out) in bad {
            assert!(matches!(l.swap_delta(&inc, &out), Err(Error::InvalidSwap(_))), "{inc:?} {out:?}");
        }
    }

    #[test]
    fn insert_examples() {
        let s = line(&[0.0, 2.0, 9.0]);
        let inst = Instance::new(&s, vec![PointId(0)], vec![], 1, 0).unwrap();
        let mut l = AssignmentLedger::new(&inst, &[PointId(0)], 5.0).unwrap();
        let before = l.cost_p();
        assert_eq!(l.insert_point(PointId(1)).unwrap(), 2.0);
        assert_eq!(l.cost_p(), before + 2.0);
        let before = l.cost_p();
        assert_eq!(l.insert_point(PointId(2)).unwrap(), 5.0);
        assert_eq!(l.cost_p(), before + 5.0);
        assert_eq!(l.insert_point(PointId(2)), Err(Error::DuplicatePoint(PointId(2))));
    }

    #[test]
    fn raise_penalty_examples() {
        let s = line(&[0.0, 7.0, 1.0]);
        let inst = Instance::new(&s, vec![PointId(0)], vec![PointId(1), PointId(2)], 1, 1).unwrap();
        let mut l = AssignmentLedger::new(&inst, &[PointId(0)], 5.0).unwrap();
        let before = l.cost_p();
        l.raise_penalty(10.0).unwrap();
        assert_eq!(l.assignments()[0].nearest_dist, 7.0);
        assert!(approx(l.cost_p(), before + 2.0));
        assert_eq!(l, AssignmentLedger::new(&inst, &[PointId(0)], 10.0).unwrap());

        let before = l.cost_p();
        l.raise_penalty(20.0).unwrap();
        assert_eq!(l.cost_p(), before);
        assert!(matches!(l.raise_penalty(3.0), Err(Error::PenaltyDecrease { .. })));
    }

    #[test]
    fn warm_up_medians() {
        let s = line(&[0.0, 3.0, 1.0]);
        let mut l = AssignmentLedger::without_facilities(&s, 2, f64::INFINITY).unwrap();
        let mut log = RecourseLog::new();
        l.add_facility(PointId(0)).unwrap();
        l.add_median(PointId(0), &mut log, 1).unwrap();
        l.insert_point(PointId(0)).unwrap();
        l.add_facility(PointId(1)).unwrap();
        l.add_median(PointId(1), &mut log, 2).unwrap();
        l.insert_point(PointId(1)).unwrap();
        assert_eq!(l.cost_p(), 0.1);
        assert_eq!(log.total(), 2);
        assert!(l.add_median(PointId(2), &mut log, 3).is_err());
        l.add_facility(PointId(2)).unwrap();
        assert_eq!(l.insert_point(PointId(2)).unwrap(), 1.0);
        let full = Instance::new(&s, ids(0..3), ids(0..3), 2, 0).unwrap();
        assert_eq!(l, AssignmentLedger::new(&full, &[PointId(0), PointId(1)], f64::INFINITY).unwrap());
    }

    /// Random small instance: `nf` facilities then `nc` candidate clients on
    /// the plane, coordinates rounded to a grid so ties occur.
    fn random_space(rng: &mut ChaCha8Rng, n: usize) -> MetricSpace {
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random_range(0..8) as f64, rng.random_range(0..8) as f64])
            .collect();
        MetricSpace::euclidean(&pts).unwrap()
    }

    fn random_subset(rng: &mut ChaCha8Rng, from: &[PointId], size: usize) -> Vec<PointId> {
        let mut pool = from.to_vec();
        let mut out = Vec::new();
        for _ in 0..size {
            let i = rng.random_range(0..pool.len());
            out.push(pool.swap_remove(i));
        }
        out
    }

    #[test]
    fn swap_delta_matches_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 1000 {
            let space = random_space(&mut rng, 10);
            let f = ids(0..4);
            let inst = Instance::new(&space, f.clone(), ids(4..10), 2, 0).unwrap();
            let s0 = random_subset(&mut rng, &f, 2);
            let p = if rng.random_bool(0.2) { f64::INFINITY } else { rng.random_range(0.5..8.0) };
            let l = AssignmentLedger::new(&inst, &s0, p).unwrap();
            let size = rng.random_range(1..=2);
            let out = random_subset(&mut rng, &s0, size);
            let closed: Vec<PointId> = l.closed_facilities().collect();
            let inc = random_subset(&mut rng, &closed, size);
            let delta = l.swap_delta(&inc, &out).unwrap();
            let after: Vec<PointId> = s0.iter().copied().filter(|m| !out.contains(m)).chain(inc.iter().copied()).collect();
            let rebuilt = AssignmentLedger::new(&inst, &after, p).unwrap();
            assert!(approx(delta, rebuilt.cost_p() - l.cost_p()), "{delta} vs {}", rebuilt.cost_p() - l.cost_p());
            checked += 1;
        }
    }

    #[test]
    fn batched_single_deltas_are_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let space = random_space(&mut rng, 12);
            let f = ids(0..6);
            let inst = Instance::new(&space, f.clone(), ids(4..12), 3, 0).unwrap();
            let s0 = random_subset(&mut rng, &f, 3);
            let l = AssignmentLedger::new(&inst, &s0, rng.random_range(0.5..6.0)).unwrap();
            let mut deltas = vec![0.0; 3];
            for inc in l.closed_facilities() {
                l.single_swap_deltas(inc, &mut deltas);
                for (s, &m) in l.medians().iter().enumerate() {
                    assert_eq!(deltas[s].to_bits(), l.swap_delta(&[inc], &[m]).unwrap().to_bits());
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn apply_then_rebuild_identical(seed in any::<u64>(), ops in 1usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let space = random_space(&mut rng, 14);
            let f = ids(0..5);
            let inst = Instance::new(&space, f.clone(), vec![], 2, 0).unwrap();
            let mut p = rng.random_range(0.5..3.0);
            let s0 = random_subset(&mut rng, &f, 2);
            let mut l = AssignmentLedger::new(&inst, &s0, p).unwrap();
            let mut log = RecourseLog::new();
            let mut pending: Vec<PointId> = ids(0..14);
            for t in 0..ops {
                match rng.random_range(0..3) {
                    0 if !pending.is_empty() => {
                        let j = pending.swap_remove(rng.random_range(0..pending.len()));
                        l.insert_point(j).unwrap();
                    }
                    1 => {
                        let size = rng.random_range(1..=2);
                        let out = random_subset(&mut rng, l.medians(), size);
                        let closed: Vec<PointId> = l.closed_facilities().collect();
                        let inc = random_subset(&mut rng, &closed, size);
                        l.apply_swap(&inc, &out, &mut log, t).unwrap();
                    }
                    _ => {
                        p *= rng.random_range(1.0..2.5);
                        l.raise_penalty(p).unwrap();
                    }
                }
            }
            let clients = l.clients().to_vec();
            let final_inst = Instance::new(&space, f, clients, 2, 0).unwrap();
            let rebuilt = AssignmentLedger::new(&final_inst, l.medians(), l.penalty()).unwrap();
            prop_assert_eq!(&l, &rebuilt);
            prop_assert!(l.cost_p() >= 0.1);
        }
    }
}
