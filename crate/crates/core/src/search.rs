//! Swap enumeration, efficient-swap detection and the offline solvers.
//!
//! Canonical order of swaps: sizes ascending; within a size, outgoing sets
//! in lexicographic id order, then incoming sets in lexicographic id order.

use crate::error::{Error, Result};
use crate::instance::{Instance, RecourseLog, Solution};
use crate::ledger::AssignmentLedger;
use crate::metric::PointId;

/// Default cap on swaps performed by one local-search run.
pub const DEFAULT_MAX_SWAPS: usize = 1_000_000;

/// An `l`-swap `(incoming, outgoing)`; both sides sorted and of equal size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwapCandidate {
    pub incoming: Vec<PointId>,
    pub outgoing: Vec<PointId>,
}

impl SwapCandidate {
    pub fn new(mut incoming: Vec<PointId>, mut outgoing: Vec<PointId>) -> Self {
        incoming.sort_unstable();
        outgoing.sort_unstable();
        SwapCandidate { incoming, outgoing }
    }

    pub fn single(incoming: PointId, outgoing: PointId) -> Self {
        SwapCandidate { incoming: vec![incoming], outgoing: vec![outgoing] }
    }

    pub fn size(&self) -> usize {
        self.outgoing.len()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// First efficient swap in canonical order.
    #[default]
    FirstImprovement,
    /// Efficient swap with the most negative delta; ties go to the earlier
    /// candidate in canonical order.
    BestImprovement,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SearchParams {
    /// Largest swap size considered.
    pub ell: usize,
    /// Efficiency threshold per swapped median.
    pub rho: f64,
    pub strategy: Strategy,
    pub max_swaps: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { ell: 1, rho: 0.0, strategy: Strategy::FirstImprovement, max_swaps: DEFAULT_MAX_SWAPS }
    }
}

impl SearchParams {
    pub fn with_ell(ell: usize) -> Self {
        SearchParams { ell, ..Default::default() }
    }
}

/// A candidate together with its delta.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSwap {
    pub swap: SwapCandidate,
    pub delta: f64,
}

/// `delta < -|A| * rho`, strictly.
#[inline]
pub fn efficient(delta: f64, size: usize, rho: f64) -> bool {
    delta < -(size as f64) * rho
}

/// Whether applying `candidate` lowers `cost_p` by more than `|A| * rho`.
pub fn is_efficient(ledger: &AssignmentLedger<'_>, candidate: &SwapCandidate, rho: f64) -> Result<bool> {
    let delta = ledger.swap_delta(&candidate.incoming, &candidate.outgoing)?;
    Ok(efficient(delta, candidate.size(), rho))
}

/// Searches for a `rho`-efficient swap of size at most `params.ell`.
/// `None` certifies that no such swap exists.
pub fn find_efficient_swap(ledger: &AssignmentLedger<'_>, params: &SearchParams) -> Option<ScoredSwap> {
    let k = ledger.medians().len();
    if k == 0 || k != ledger.k() {
        return None;
    }
    let closed: Vec<PointId> = ledger.closed_facilities().collect();
    if closed.is_empty() {
        return None;
    }
    let rho = params.rho;
    let mut best = single_swaps(ledger, &closed, rho, params.strategy);
    if params.strategy == Strategy::FirstImprovement && best.is_some() {
        return best;
    }
    let max_size = params.ell.min(k).min(closed.len());
    if max_size >= 2 {
        let columns: Vec<Vec<f64>> = closed.iter().map(|&i| ledger.column(i)).collect();
        for size in 2..=max_size {
            let found = multi_swaps(ledger, &closed, &columns, size, rho, params.strategy, best.as_ref().map(|b| b.delta));
            if let Some(found) = found {
                if params.strategy == Strategy::FirstImprovement {
                    return Some(found);
                }
                best = Some(found);
            }
        }
    }
    best
}

fn single_swaps(ledger: &AssignmentLedger<'_>, closed: &[PointId], rho: f64, strategy: Strategy) -> Option<ScoredSwap> {
    let medians = ledger.medians();
    let k = medians.len();
    let mut deltas = vec![0.0; k];
    match strategy {
        Strategy::FirstImprovement => {
            // first efficient incoming per outgoing slot
            let mut first: Vec<Option<(PointId, f64)>> = vec![None; k];
            for &inc in closed {
                ledger.single_swap_deltas(inc, &mut deltas);
                for (s, &d) in deltas.iter().enumerate() {
                    if first[s].is_none() && efficient(d, 1, rho) {
                        first[s] = Some((inc, d));
                    }
                }
                if first[0].is_some() {
                    break;
                }
            }
            first
                .iter()
                .enumerate()
                .find_map(|(s, f)| f.map(|(inc, d)| ScoredSwap { swap: SwapCandidate::single(inc, medians[s]), delta: d }))
        }
        Strategy::BestImprovement => {
            // (delta, outgoing slot, incoming position)
            let mut best: Option<(f64, usize, usize)> = None;
            for (pos, &inc) in closed.iter().enumerate() {
                ledger.single_swap_deltas(inc, &mut deltas);
                for (s, &d) in deltas.iter().enumerate() {
                    if !efficient(d, 1, rho) {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bd, bs, bp)) => d < bd || (d == bd && (s, pos) < (bs, bp)),
                    };
                    if better {
                        best = Some((d, s, pos));
                    }
                }
            }
            best.map(|(d, s, pos)| ScoredSwap { swap: SwapCandidate::single(closed[pos], medians[s]), delta: d })
        }
    }
}

fn multi_swaps(
    ledger: &AssignmentLedger<'_>,
    closed: &[PointId],
    columns: &[Vec<f64>],
    size: usize,
    rho: f64,
    strategy: Strategy,
    incumbent: Option<f64>,
) -> Option<ScoredSwap> {
    let medians = ledger.medians();
    let mut best: Option<ScoredSwap> = None;
    let mut bound = incumbent;
    for out_slots in Combinations::new(medians.len(), size) {
        for in_pos in Combinations::new(closed.len(), size) {
            let cols: Vec<&[f64]> = in_pos.iter().map(|&p| columns[p].as_slice()).collect();
            let delta = ledger.multi_swap_delta(&out_slots, &cols);
            if !efficient(delta, size, rho) {
                continue;
            }
            let candidate = || ScoredSwap {
                swap: SwapCandidate {
                    incoming: in_pos.iter().map(|&p| closed[p]).collect(),
                    outgoing: out_slots.iter().map(|&s| medians[s]).collect(),
                },
                delta,
            };
            match strategy {
                Strategy::FirstImprovement => return Some(candidate()),
                Strategy::BestImprovement => {
                    if bound.is_none_or(|b| delta < b) {
                        bound = Some(delta);
                        best = Some(candidate());
                    }
                }
            }
        }
    }
    best
}

/// Lexicographic `size`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, size: usize) -> Self {
        let current = (size <= n).then(|| (0..size).collect());
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let c = self.current.as_mut().expect("checked");
        let size = c.len();
        let mut i = size;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if c[i] < self.n - size + i {
                c[i] += 1;
                for j in i + 1..size {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Outcome of [`local_search_to_optimum`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub swaps: usize,
    /// True when the swap cap stopped the search before a local optimum.
    pub capped: bool,
}

/// Applies efficient swaps until none is left. Before each search the
/// threshold is recomputed as `rho_rule(cost_p)`.
pub fn local_search_to_optimum<R>(
    ledger: &mut AssignmentLedger<'_>,
    params: &SearchParams,
    rho_rule: R,
    recourse: &mut RecourseLog,
    t: usize,
) -> Result<SearchOutcome>
where
    R: Fn(f64) -> f64,
{
    let mut swaps = 0;
    loop {
        if swaps >= params.max_swaps {
            return Ok(SearchOutcome { swaps, capped: true });
        }
        let current = SearchParams { rho: rho_rule(ledger.cost_p()), ..*params };
        let Some(found) = find_efficient_swap(ledger, &current) else {
            return Ok(SearchOutcome { swaps, capped: false });
        };
        ledger.apply_swap(&found.swap.incoming, &found.swap.outgoing, recourse, t)?;
        swaps += 1;
    }
}

/// Result of an offline penalty search.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySearchResult {
    pub solution: Solution,
    pub penalty: f64,
    /// `cost_p` of the final medians, offset included.
    pub cost_p: f64,
    /// Offset plus connection cost of the non-outliers.
    pub inlier_cost: f64,
    pub swaps: usize,
    pub capped: bool,
}

/// Local search for k-median under `d_p` from the first `k` facilities,
/// with the constant threshold `params.rho`.
pub fn offline_penalty_local_search(instance: &Instance<'_>, p: f64, params: &SearchParams) -> Result<PenaltySearchResult> {
    let init = initial_medians(instance)?;
    let rho = params.rho;
    offline_penalty_local_search_from(instance, &init, p, params, |_| rho)
}

/// The first `k` facilities in id order.
pub fn initial_medians(instance: &Instance<'_>) -> Result<Vec<PointId>> {
    let f = instance.facilities();
    if instance.k() > f.len() {
        return Err(Error::Infeasible { k: instance.k(), available: f.len() });
    }
    Ok(f[..instance.k()].to_vec())
}

/// Offline local search from a given median set with a threshold rule,
/// e.g. `|c| eps * c / k` for the polynomial-time variant.
pub fn offline_penalty_local_search_from<R>(
    instance: &Instance<'_>,
    init: &[PointId],
    p: f64,
    params: &SearchParams,
    rho_rule: R,
) -> Result<PenaltySearchResult>
where
    R: Fn(f64) -> f64,
{
    if init.len() != instance.k() {
        return Err(Error::InvalidSolution(format!("{} initial medians for k = {}", init.len(), instance.k())));
    }
    if params.ell == 0 || params.ell > instance.k() {
        return Err(Error::InvalidConfig(format!("ell = {} must lie in [1, k = {}]", params.ell, instance.k())));
    }
    let mut ledger = AssignmentLedger::new(instance, init, p)?;
    let mut log = RecourseLog::new();
    let outcome = local_search_to_optimum(&mut ledger, params, rho_rule, &mut log, 0)?;
    Ok(PenaltySearchResult {
        solution: ledger.solution(),
        penalty: p,
        cost_p: ledger.cost_p(),
        inlier_cost: ledger.inlier_cost(),
        swaps: outcome.swaps,
        capped: outcome.capped,
    })
}

/// `p(g) = (3l + 2) g / ((l + 1) gamma z)`.
pub fn bicriteria_penalty(guess: f64, ell: usize, gamma: f64, z: usize) -> f64 {
    let ell = ell as f64;
    (3.0 * ell + 2.0) * guess / ((ell + 1.0) * gamma * z as f64)
}

/// Outlier allowance `(1 + 1/l)(1 + gamma) z` of the offline bicriteria solver.
pub fn bicriteria_outlier_budget(ell: usize, gamma: f64, z: usize) -> f64 {
    (1.0 + 1.0 / ell as f64) * (1.0 + gamma) * z as f64
}

/// Grid of guesses for the optimum: `lo * factor^m` for `m = 0, 1, ...`
/// up to and including the first value `>= hi`.
pub fn guess_grid(lo: f64, hi: f64, factor: f64) -> Vec<f64> {
    assert!(factor > 1.0 && lo > 0.0, "grid needs lo > 0 and factor > 1");
    let mut out = Vec::new();
    let mut m = 0;
    loop {
        let g = lo * factor.powi(m);
        out.push(g);
        if g >= hi {
            break;
        }
        m += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct BicriteriaParams {
    pub ell: usize,
    pub gamma: f64,
    pub grid_factor: f64,
    pub strategy: Strategy,
    pub max_swaps: usize,
    /// Start each guess from the previous guess's local optimum instead of
    /// the given initial medians.
    pub warm_start: bool,
}

impl Default for BicriteriaParams {
    fn default() -> Self {
        BicriteriaParams {
            ell: 1,
            gamma: 1.0,
            grid_factor: 2.0,
            strategy: Strategy::FirstImprovement,
            max_swaps: DEFAULT_MAX_SWAPS,
            warm_start: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BicriteriaResult {
    pub best: PenaltySearchResult,
    /// Guess of the optimum that produced `best`.
    pub guess: f64,
    /// Whether `best` respects the outlier allowance.
    pub within_budget: bool,
    /// Number of distinct local searches run.
    pub runs: usize,
}

/// Offline bicriteria solver: tries the penalty implied by every guess of
/// the optimum on a geometric grid and keeps the cheapest solution (by
/// inlier cost) whose outlier count respects `(1 + 1/l)(1 + gamma) z`.
/// If no guess respects it, the solution with the fewest outliers is
/// returned with `within_budget = false`.
pub fn offline_bicriteria(instance: &Instance<'_>, params: &BicriteriaParams) -> Result<BicriteriaResult> {
    let init = initial_medians(instance)?;
    offline_bicriteria_from(instance, &init, params)
}

pub fn offline_bicriteria_from(instance: &Instance<'_>, init: &[PointId], params: &BicriteriaParams) -> Result<BicriteriaResult> {
    let z = instance.z();
    if z == 0 {
        return Err(Error::BicriteriaInapplicable);
    }
    let valid = params.gamma > 0.0 && params.grid_factor > 1.0;
    if !valid {
        return Err(Error::InvalidConfig("gamma must be positive and grid factor above 1".into()));
    }
    let mut ids: Vec<PointId> = instance.facilities().iter().chain(instance.clients()).copied().collect();
    ids.sort_unstable();
    ids.dedup();
    let (lo, hi, max_dist) = if ids.len() < 2 {
        (0.1, 0.1, 0.0)
    } else {
        let bounds = instance.space().diameter_bounds(&ids)?;
        match bounds.min_positive {
            Some(m) => (0.1 * m, instance.n() as f64 * bounds.max, bounds.max),
            None => (0.1, 0.1, 0.0),
        }
    };
    let search = SearchParams { ell: params.ell, rho: 0.0, strategy: params.strategy, max_swaps: params.max_swaps };
    let budget = bicriteria_outlier_budget(params.ell, params.gamma, z);
    let mut best: Option<(PenaltySearchResult, f64)> = None;
    let mut fallback: Option<(PenaltySearchResult, f64)> = None;
    let mut untruncated_done = false;
    let mut runs = 0;
    let mut start = init.to_vec();
    for g in guess_grid(lo, hi, params.grid_factor) {
        let p = bicriteria_penalty(g, params.ell, params.gamma, z);
        // every p above the diameter gives the same untruncated run
        if p > max_dist {
            if untruncated_done {
                continue;
            }
            untruncated_done = true;
        }
        let run = offline_penalty_local_search_from(instance, &start, p, &search, |_| 0.0)?;
        runs += 1;
        if params.warm_start {
            start.clone_from(&run.solution.medians);
        }
        let outliers = run.solution.outliers.len();
        if (outliers as f64) <= budget {
            if best.as_ref().is_none_or(|(b, _)| run.inlier_cost < b.inlier_cost) {
                best = Some((run, g));
            }
        } else if fallback.as_ref().is_none_or(|(f, _)| outliers < f.solution.outliers.len()) {
            fallback = Some((run, g));
        }
    }
    let (best, guess, within_budget) = match (best, fallback) {
        (Some((b, g)), _) => (b, g, true),
        (None, Some((f, g))) => (f, g, false),
        (None, None) => unreachable!("guess grid is never empty"),
    };
    Ok(BicriteriaResult { best, guess, within_budget, runs })
}
