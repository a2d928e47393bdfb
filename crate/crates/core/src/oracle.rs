//! Brute-force ground truth for tiny instances and checkers for the
//! guarantees of the local search.
//!
//! Everything here evaluates distances straight from the metric; nothing
//! goes through [`crate::ledger`], so the oracle stays independent of the
//! code it checks.

use crate::error::{Error, Result};
use crate::instance::{Instance, COST_OFFSET};
use crate::metric::PointId;
use crate::online::Setting;
use crate::search::Combinations;

/// Largest number of median subsets the oracle will enumerate.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Relative slack for inequality checks; absorbs summation-order rounding.
pub const CHECK_RTOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OutlierOptimum {
    /// Offset included.
    pub cost: f64,
    pub medians: Vec<PointId>,
    pub outliers: Vec<PointId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyOptimum {
    /// Offset included.
    pub cost: f64,
    pub medians: Vec<PointId>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn guard(instance: &Instance<'_>) -> Result<()> {
    let subsets = binomial(instance.facilities().len(), instance.k());
    if subsets > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { subsets, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

fn median_subsets<'i>(instance: &'i Instance<'_>) -> impl Iterator<Item = Vec<PointId>> + 'i {
    let f = instance.facilities();
    Combinations::new(f.len(), instance.k()).map(move |c| c.iter().map(|&i| f[i]).collect())
}

/// `offset + sum_j min(d(j, S), p)`, straight from the metric.
pub fn penalty_cost(instance: &Instance<'_>, medians: &[PointId], p: f64) -> f64 {
    let space = instance.space();
    let mut cost = COST_OFFSET;
    for &j in instance.clients() {
        let d = medians.iter().map(|&i| space.dist(j, i)).fold(f64::INFINITY, f64::min);
        cost += d.min(p);
    }
    cost
}

/// Exact optimum of k-median with `z` outliers: every size-`k` median set,
/// each scored with its `z` farthest clients discarded.
pub fn brute_force_kmedo(instance: &Instance<'_>) -> Result<OutlierOptimum> {
    guard(instance)?;
    let mut best: Option<OutlierOptimum> = None;
    for medians in median_subsets(instance) {
        let (cost, outliers) = instance.cost_with_outliers(&medians);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(OutlierOptimum { cost, medians, outliers });
        }
    }
    Ok(best.expect("k <= |F| gives at least one subset"))
}

/// Exact optimum of k-median under `d_p`.
pub fn brute_force_penalty_kmedian(instance: &Instance<'_>, p: f64) -> Result<PenaltyOptimum> {
    guard(instance)?;
    let mut best: Option<PenaltyOptimum> = None;
    for medians in median_subsets(instance) {
        let cost = penalty_cost(instance, &medians, p);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(PenaltyOptimum { cost, medians });
        }
    }
    Ok(best.expect("k <= |F| gives at least one subset"))
}

/// An improving exchange found by [`exhaustive_efficient_swap`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustiveSwap {
    pub incoming: Vec<PointId>,
    pub outgoing: Vec<PointId>,
    /// `cost_p` after minus before, each summed from scratch.
    pub delta: f64,
}

/// Tries every exchange of up to `ell` medians for closed facilities and
/// returns the first whose from-scratch cost drop exceeds `|A| rho` by more
/// than a relative `CHECK_RTOL` of the current cost.
pub fn exhaustive_efficient_swap(
    instance: &Instance<'_>,
    medians: &[PointId],
    p: f64,
    rho: f64,
    ell: usize,
) -> Result<Option<ExhaustiveSwap>> {
    let mut sorted = medians.to_vec();
    sorted.sort_unstable();
    let closed: Vec<PointId> =
        instance.facilities().iter().copied().filter(|f| sorted.binary_search(f).is_err()).collect();
    let swaps: u128 = (1..=ell.min(sorted.len()))
        .map(|s| binomial(sorted.len(), s) * binomial(closed.len(), s))
        .sum();
    if swaps > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { subsets: swaps, limit: ENUMERATION_LIMIT });
    }
    let before = penalty_cost(instance, &sorted, p);
    let slack = CHECK_RTOL * before;
    for size in 1..=ell.min(sorted.len()).min(closed.len()) {
        for out in Combinations::new(sorted.len(), size) {
            for inc in Combinations::new(closed.len(), size) {
                let mut next: Vec<PointId> =
                    sorted.iter().enumerate().filter(|(i, _)| !out.contains(i)).map(|(_, &m)| m).collect();
                next.extend(inc.iter().map(|&i| closed[i]));
                let delta = penalty_cost(instance, &next, p) - before;
                if delta < -(size as f64) * rho - slack {
                    return Ok(Some(ExhaustiveSwap {
                        incoming: inc.iter().map(|&i| closed[i]).collect(),
                        outgoing: out.iter().map(|&i| sorted[i]).collect(),
                        delta,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Right-hand side of the locality bound against one comparison set:
/// `offset + sum_j min((3 + 2/l) d_p(j, S*), (1 + 1/l) p) + k rho`.
pub fn locality_rhs(instance: &Instance<'_>, reference: &[PointId], p: f64, rho: f64, ell: usize) -> f64 {
    let space = instance.space();
    let ell = ell as f64;
    let (near, cap) = (3.0 + 2.0 / ell, (1.0 + 1.0 / ell) * p);
    let mut rhs = COST_OFFSET;
    for &j in instance.clients() {
        let d = reference.iter().map(|&i| space.dist(j, i)).fold(f64::INFINITY, f64::min).min(p);
        rhs += (near * d).min(cap);
    }
    rhs + instance.k() as f64 * rho
}

/// First size-`k` set `S*` violating the locality bound for `medians`, if any.
pub fn locality_bound_violation(
    instance: &Instance<'_>,
    medians: &[PointId],
    p: f64,
    rho: f64,
    ell: usize,
) -> Result<Option<Vec<PointId>>> {
    guard(instance)?;
    let lhs = penalty_cost(instance, medians, p);
    for reference in median_subsets(instance) {
        let rhs = locality_rhs(instance, &reference, p, rho, ell);
        if lhs > rhs * (1.0 + CHECK_RTOL) {
            return Ok(Some(reference));
        }
    }
    Ok(None)
}

/// Whether `cost_p(S)` obeys the locality bound against every size-`k` set.
/// Holds for any `S` admitting no `rho`-efficient `l`-swap.
pub fn check_locality_bound(instance: &Instance<'_>, medians: &[PointId], p: f64, rho: f64, ell: usize) -> Result<bool> {
    Ok(locality_bound_violation(instance, medians, p, rho, ell)?.is_none())
}

/// `factor * 2 (3l + 2) opt / (gamma (l + 1) z)` with `factor = 2` when
/// `F = C`.
pub fn penalty_bound(opt: f64, z: usize, ell: usize, gamma: f64, setting: Setting) -> Result<f64> {
    if z == 0 {
        return Err(Error::PenaltyBoundInapplicable);
    }
    let factor = match setting {
        Setting::StaticF => 1.0,
        Setting::FEqualsC => 2.0,
    };
    let ell = ell as f64;
    Ok(factor * 2.0 * (3.0 * ell + 2.0) * opt / (gamma * (ell + 1.0) * z as f64))
}

/// `p <= penalty_bound(...)`, non-strict.
pub fn check_penalty_bound(p: f64, opt: f64, z: usize, ell: usize, gamma: f64, setting: Setting) -> Result<bool> {
    Ok(p <= penalty_bound(opt, z, ell, gamma, setting)?)
}

/// `(1 - eps) cost_p <= (3 + 2/l) opt + (1 + 1/l) z p`, the guarantee right
/// after the swap loop.
pub fn check_cost_bound(cost_p: f64, opt: f64, z: usize, p: f64, ell: usize, epsilon: f64) -> bool {
    let ell = ell as f64;
    let zp = if z == 0 { 0.0 } else { z as f64 * p };
    let rhs = (3.0 + 2.0 / ell) * opt + (1.0 + 1.0 / ell) * zp;
    (1.0 - epsilon) * cost_p <= rhs * (1.0 + CHECK_RTOL)
}
