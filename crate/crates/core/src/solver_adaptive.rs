//! Adaptive number of centers: the fixed-k iteration plus a periodic merge step.
//!
//! Every `t_merge` completed iterations (while `k > 1`) a distance threshold `δ`
//! is taken as the lower `q`-quantile of the pairwise Euclidean center
//! distances. Pairs within `δ` are then tried in lexicographic order: both
//! blocks are replaced by the gauge representative of their pooled points, and
//! the merge is kept iff it does not increase the penalized objective
//! `f_F(x) + λ_k · k`. After every accepted merge the scan restarts against the
//! same `δ`; the step ends when a full scan accepts nothing.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::envelope::{assign_all, objective_raw, Assignment, CenterConfig, Dataset};
use crate::error::{Error, Result};
use crate::gauge::{center_representative, GaugeKind};
use crate::solver_fixed::{delete_empty_in_place, solve, SolveParams, SolveReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeParams {
    /// Merge period in iterations.
    pub t_merge: usize,
    /// Quantile of pairwise center distances used as merge threshold.
    pub q: f64,
    /// Penalty per center.
    pub lambda_k: f64,
}

impl Default for MergeParams {
    fn default() -> Self {
        Self { t_merge: 1, q: 0.10, lambda_k: 10.0 }
    }
}

impl MergeParams {
    pub fn validate(&self) -> Result<()> {
        if self.t_merge == 0 {
            return Err(Error::param("merge period must be at least 1"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::param(format!("merge quantile must lie in (0, 1), got {}", self.q)));
        }
        if !(self.lambda_k >= 0.0) || !self.lambda_k.is_finite() {
            return Err(Error::param("penalty must be nonnegative and finite"));
        }
        Ok(())
    }
}

/// An accepted merge. Penalized values are `f_F + λ_k · k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub pair: (usize, usize),
    pub k_before: usize,
    pub k_after: usize,
    pub penalized_before: f64,
    pub penalized_after: f64,
}

/// Euclidean distances `‖x_i − x_j‖₂` for `i < j` in lexicographic order.
pub fn pairwise_center_distances(centers: &CenterConfig) -> Vec<f64> {
    let k = centers.k();
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            out.push(GaugeKind::L2.distance(centers.block(i), centers.block(j)));
        }
    }
    out
}

/// Nearest-rank lower quantile: the `⌈q·P⌉`-th smallest of `P` distances.
pub fn merge_threshold(distances: &[f64], q: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::input("no pairwise distances"));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let p = sorted.len();
    // The small offset keeps products like 0.1 · 30 = 3.0000000000000004 on rank 3.
    let rank = (q * p as f64 - 1e-9).ceil() as i64;
    let idx = (rank - 1).clamp(0, p as i64 - 1) as usize;
    Ok(sorted[idx])
}

/// Center of the pooled points of two clusters under the gauge.
pub fn merged_center<P: AsRef<[f64]>>(kind: GaugeKind, points: &[P]) -> Result<Vec<f64>> {
    center_representative(kind, points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub centers: CenterConfig,
    pub assignment: Assignment,
    pub events: Vec<MergeEvent>,
}

impl MergeOutcome {
    pub fn accepted(&self) -> usize {
        self.events.len()
    }
}

/// Merge cascade against a fixed threshold `delta`.
///
/// `assignment` must be the nearest-center assignment of `centers`.
pub fn attempt_merges(
    kind: GaugeKind,
    centers: &CenterConfig,
    assignment: &Assignment,
    data: &Dataset,
    params: &MergeParams,
    delta: f64,
) -> Result<MergeOutcome> {
    params.validate()?;
    if !(delta >= 0.0) {
        return Err(Error::param(format!("merge threshold must be nonnegative, got {delta}")));
    }
    if assignment.owner.len() != data.len() || assignment.k() != centers.k() {
        return Err(Error::input("assignment does not match centers and data"));
    }
    let mut centers = centers.clone();
    let mut assignment = assignment.clone();
    let mut cache = MergeCache::default();
    let events = merge_cascade(kind, &mut centers, &mut assignment, data, params.lambda_k, delta, &mut cache)?;
    Ok(MergeOutcome { centers, assignment, events })
}

/// Merged centers keyed by the sorted indices of the pooled points.
///
/// The representative depends only on the pooled points, and the same pairs
/// are retried at every merge step once memberships settle.
#[derive(Debug, Default)]
pub(crate) struct MergeCache {
    centers: HashMap<Vec<usize>, Vec<f64>>,
}

impl MergeCache {
    const CAPACITY: usize = 256;

    fn merged(&mut self, kind: GaugeKind, data: &Dataset, members: Vec<usize>) -> Result<Vec<f64>> {
        if let Some(c) = self.centers.get(&members) {
            return Ok(c.clone());
        }
        let pooled: Vec<&[f64]> = members.iter().map(|&p| data.point(p)).collect();
        let merged = merged_center(kind, &pooled)?;
        if self.centers.len() >= Self::CAPACITY {
            self.centers.clear();
        }
        self.centers.insert(members, merged.clone());
        Ok(merged)
    }
}

fn merge_cascade(
    kind: GaugeKind,
    centers: &mut CenterConfig,
    assignment: &mut Assignment,
    data: &Dataset,
    lambda_k: f64,
    delta: f64,
    cache: &mut MergeCache,
) -> Result<Vec<MergeEvent>> {
    let mut events = Vec::new();
    'scan: while centers.k() > 1 {
        let k = centers.k();
        let current = objective_raw(kind, centers, data);
        for i in 0..k {
            for j in i + 1..k {
                if GaugeKind::L2.distance(centers.block(i), centers.block(j)) > delta {
                    continue;
                }
                let members: Vec<usize> = assignment
                    .owner
                    .iter()
                    .enumerate()
                    .filter(|(_, &o)| o == i || o == j)
                    .map(|(p, _)| p)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let merged = cache.merged(kind, data, members)?;
                let mut candidate = centers.clone();
                candidate.block_mut(i).copy_from_slice(&merged);
                let keep: Vec<bool> = (0..k).map(|l| l != j).collect();
                candidate.retain_blocks(&keep);
                let merged_obj = objective_raw(kind, &candidate, data);
                let before = current + lambda_k * k as f64;
                let after = merged_obj + lambda_k * (k - 1) as f64;
                if after <= before {
                    *centers = candidate;
                    *assignment = assign_all(kind, centers, data);
                    delete_empty_in_place(centers, assignment);
                    let k_after = centers.k();
                    let penalized_after = merged_obj + lambda_k * k_after as f64;
                    debug_assert!(penalized_after <= before);
                    events.push(MergeEvent {
                        pair: (i, j),
                        k_before: k,
                        k_after,
                        penalized_before: before,
                        penalized_after,
                    });
                    continue 'scan;
                }
            }
        }
        break;
    }
    Ok(events)
}

/// Threshold computation plus merge cascade, applied in place by the solver.
pub(crate) fn merge_step(
    kind: GaugeKind,
    centers: &mut CenterConfig,
    assignment: &mut Assignment,
    data: &Dataset,
    params: &MergeParams,
    cache: &mut MergeCache,
) -> Result<Vec<MergeEvent>> {
    let delta = merge_threshold(&pairwise_center_distances(centers), params.q)?;
    merge_cascade(kind, centers, assignment, data, params.lambda_k, delta, cache)
}

/// Adaptive-k solve over the full smoothing schedule.
pub fn solve_adaptive(
    kind: GaugeKind,
    data: &Dataset,
    params: &SolveParams,
    merge: &MergeParams,
    init: &CenterConfig,
) -> Result<SolveReport> {
    solve(kind, data, params, Some(merge), init)
}
