//! Gradient descent on the smoothed objective with reassignment and empty-cluster
//! deletion, run over a decreasing schedule of smoothing parameters.
//!
//! One iteration at smoothing level `μ` is:
//!
//! 1. `x ← x − α ∇f^μ(x)` with `α = step_factor · μ / m`,
//! 2. reassign every point to its nearest center,
//! 3. delete centers that serve no point.
//!
//! A stage stops once `‖∇f^μ(x)‖ ≤ ε (‖x‖ + 1)` or when the shared iteration
//! pool (summed over all stages) runs out. Each stage starts from the previous
//! stage's centers.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::RNG_ALGORITHM;
use crate::envelope::{assign_all, objective_raw, Assignment, CenterConfig, Dataset, Smoother};
use crate::error::{Error, Result};
use crate::gauge::GaugeKind;
use crate::solver_adaptive::{merge_step, MergeCache, MergeEvent, MergeParams};

/// Version of the serialized [`SolveReport`] layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    /// Strictly decreasing smoothing levels.
    pub mu_schedule: Vec<f64>,
    /// Stepsize is `step_factor · μ / m`; must lie in (0, 2).
    pub step_factor: f64,
    /// Relative gradient tolerance.
    pub epsilon: f64,
    /// Iteration pool shared by all stages.
    pub max_total_iters: usize,
    pub seed: u64,
    /// Record the smoothed objective after every iteration.
    #[serde(default)]
    pub record_path: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            mu_schedule: vec![1.0, 0.5, 0.2, 0.1, 0.01],
            step_factor: 1.8,
            epsilon: 1e-6,
            max_total_iters: 10_000,
            seed: 2026,
            record_path: false,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        if self.mu_schedule.is_empty() {
            return Err(Error::param("mu schedule is empty"));
        }
        if self.mu_schedule.iter().any(|&mu| !(mu > 0.0) || !mu.is_finite()) {
            return Err(Error::param("mu schedule entries must be positive and finite"));
        }
        if self.mu_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("mu schedule must be strictly decreasing"));
        }
        if !(self.step_factor > 0.0 && self.step_factor < 2.0) {
            return Err(Error::param(format!("step factor must lie in (0, 2), got {}", self.step_factor)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::param("epsilon must be positive"));
        }
        if self.max_total_iters == 0 {
            return Err(Error::param("iteration budget must be at least 1"));
        }
        Ok(())
    }
}

/// Per-stage diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub mu: f64,
    pub alpha: f64,
    pub iters: usize,
    pub deletions: usize,
    pub merges: usize,
    /// Iterations whose reassignment changed at least one owner.
    pub assignment_changes: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
    /// Smallest gap between a point's nearest and second-nearest center at the
    /// end of the stage; `None` when only one center remains.
    pub min_assignment_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_path: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merge_log: Vec<MergeEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub rng: String,
    pub gauge: GaugeKind,
    pub seed: u64,
    pub k_init: usize,
    pub k_final: usize,
    pub objective_raw: f64,
    pub converged: bool,
    pub total_iters: usize,
    pub wall_time_s: f64,
    pub centers: CenterConfig,
    pub assignment: Assignment,
    pub stages: Vec<StageTrace>,
}

impl SolveReport {
    /// Copy with the wall-clock field zeroed, for byte-level comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_s: 0.0, ..self.clone() }
    }
}

/// One gradient step `x − α ∇f^μ(x)`. Blocks serving no point do not move.
pub fn gradient_step(
    kind: GaugeKind,
    centers: &CenterConfig,
    data: &Dataset,
    mu: f64,
    alpha: f64,
) -> Result<CenterConfig> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("stepsize must be nonnegative, got {alpha}")));
    }
    let grad = crate::envelope::envelope_gradient(kind, centers, data, mu)?;
    let mut next = centers.clone();
    for (x, g) in next.as_flat_mut().iter_mut().zip(grad.as_flat()) {
        *x -= alpha * g;
    }
    Ok(next)
}

/// Remove centers with no assigned points, keeping the relative order of the
/// rest and remapping owners.
pub fn delete_empty_clusters(centers: &CenterConfig, assignment: &Assignment) -> (CenterConfig, Assignment) {
    let mut centers = centers.clone();
    let mut assignment = assignment.clone();
    delete_empty_in_place(&mut centers, &mut assignment);
    (centers, assignment)
}

/// Returns the number of deleted centers.
pub(crate) fn delete_empty_in_place(centers: &mut CenterConfig, assignment: &mut Assignment) -> usize {
    if !assignment.has_empty() {
        return 0;
    }
    let keep: Vec<bool> = assignment.cluster_sizes.iter().map(|&s| s > 0).collect();
    let mut remap = vec![usize::MAX; keep.len()];
    let mut next = 0;
    for (l, &kept) in keep.iter().enumerate() {
        if kept {
            remap[l] = next;
            next += 1;
        }
    }
    let removed = keep.len() - next;
    centers.retain_blocks(&keep);
    for o in assignment.owner.iter_mut() {
        *o = remap[*o];
    }
    assignment.cluster_sizes.retain(|&s| s > 0);
    removed
}

/// Runs one smoothing stage from `centers` with stepsize `step_factor · μ / m`.
pub fn solve_fixed_stage(
    kind: GaugeKind,
    data: &Dataset,
    centers: &CenterConfig,
    mu: f64,
    params: &SolveParams,
) -> Result<(CenterConfig, StageTrace)> {
    params.validate()?;
    check_init(data, centers)?;
    let mut engine = Engine::new(kind, data, params, None);
    let mut centers = centers.clone();
    let mut assignment = assign_all(kind, &centers, data);
    let trace = engine.run_stage(&mut centers, &mut assignment, mu)?;
    Ok((centers, trace))
}

/// Fixed-k solve (empty clusters are still deleted) over the full schedule.
pub fn solve_fixed(kind: GaugeKind, data: &Dataset, params: &SolveParams, init: &CenterConfig) -> Result<SolveReport> {
    solve(kind, data, params, None, init)
}

pub(crate) fn check_init(data: &Dataset, init: &CenterConfig) -> Result<()> {
    if init.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: init.dim() });
    }
    Ok(())
}

pub(crate) fn solve(
    kind: GaugeKind,
    data: &Dataset,
    params: &SolveParams,
    merge: Option<&MergeParams>,
    init: &CenterConfig,
) -> Result<SolveReport> {
    params.validate()?;
    if let Some(m) = merge {
        m.validate()?;
    }
    check_init(data, init)?;

    let start = Instant::now();
    let mut engine = Engine::new(kind, data, params, merge);
    let mut centers = init.clone();
    let mut assignment = assign_all(kind, &centers, data);
    let mut stages = Vec::with_capacity(params.mu_schedule.len());
    for &mu in &params.mu_schedule {
        stages.push(engine.run_stage(&mut centers, &mut assignment, mu)?);
    }
    // A converged first check can leave initial duplicates unserved.
    let trailing = delete_empty_in_place(&mut centers, &mut assignment);
    if let Some(last) = stages.last_mut() {
        last.deletions += trailing;
    }
    let wall_time_s = start.elapsed().as_secs_f64();

    Ok(SolveReport {
        schema_version: REPORT_SCHEMA_VERSION,
        rng: RNG_ALGORITHM.to_string(),
        gauge: kind,
        seed: params.seed,
        k_init: init.k(),
        k_final: centers.k(),
        objective_raw: objective_raw(kind, &centers, data),
        converged: stages.last().is_some_and(|s| s.converged),
        total_iters: params.max_total_iters - engine.remaining,
        wall_time_s,
        centers,
        assignment,
        stages,
    })
}

/// Iteration state shared across stages of one solve.
pub(crate) struct Engine<'a> {
    kind: GaugeKind,
    data: &'a Dataset,
    params: &'a SolveParams,
    merge: Option<&'a MergeParams>,
    smoother: Smoother,
    merge_cache: MergeCache,
    /// Iterations completed across all stages.
    global_iter: usize,
    remaining: usize,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(
        kind: GaugeKind,
        data: &'a Dataset,
        params: &'a SolveParams,
        merge: Option<&'a MergeParams>,
    ) -> Self {
        Self {
            kind,
            data,
            params,
            merge,
            smoother: Smoother::new(kind, data.dim()),
            merge_cache: MergeCache::default(),
            global_iter: 0,
            remaining: params.max_total_iters,
        }
    }

    pub(crate) fn run_stage(
        &mut self,
        centers: &mut CenterConfig,
        assignment: &mut Assignment,
        mu: f64,
    ) -> Result<StageTrace> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::param(format!("mu must be positive and finite, got {mu}")));
        }
        let data = self.data;
        let alpha = self.params.step_factor * mu / data.len() as f64;
        let mut trace = StageTrace {
            mu,
            alpha,
            iters: 0,
            deletions: 0,
            merges: 0,
            assignment_changes: 0,
            final_grad_norm: 0.0,
            converged: false,
            min_assignment_margin: None,
            objective_path: Vec::new(),
            merge_log: Vec::new(),
        };
        let mut grad = CenterConfig::zeros(centers.k(), centers.dim());

        loop {
            if grad.k() != centers.k() {
                grad = CenterConfig::zeros(centers.k(), centers.dim());
            }
            self.smoother.gradient(centers, data, assignment, mu, &mut grad);
            trace.final_grad_norm = grad.norm();
            if trace.final_grad_norm <= self.params.epsilon * (centers.norm() + 1.0) {
                trace.converged = true;
                break;
            }
            if self.remaining == 0 {
                break;
            }

            for (x, g) in centers.as_flat_mut().iter_mut().zip(grad.as_flat()) {
                *x -= alpha * g;
            }
            let mut next = assign_all(self.kind, centers, data);
            if next.owner != assignment.owner {
                trace.assignment_changes += 1;
            }
            trace.deletions += delete_empty_in_place(centers, &mut next);
            *assignment = next;

            self.remaining -= 1;
            self.global_iter += 1;
            trace.iters += 1;

            if let Some(merge) = self.merge {
                if self.global_iter.is_multiple_of(merge.t_merge) && centers.k() > 1 {
                    let events = merge_step(self.kind, centers, assignment, data, merge, &mut self.merge_cache)?;
                    trace.merges += events.len();
                    trace.merge_log.extend(events);
                }
            }
            if self.params.record_path {
                trace.objective_path.push(self.smoother.value(centers, data, assignment, mu));
            }
        }
        trace.min_assignment_margin = min_margin(self.kind, centers, data);
        Ok(trace)
    }
}

fn min_margin(kind: GaugeKind, centers: &CenterConfig, data: &Dataset) -> Option<f64> {
    if centers.k() < 2 {
        return None;
    }
    let mut margin = f64::INFINITY;
    for a in data.points() {
        let (mut first, mut second) = (f64::INFINITY, f64::INFINITY);
        for block in centers.blocks() {
            let d = kind.distance(block, a);
            if d < first {
                second = first;
                first = d;
            } else if d < second {
                second = d;
            }
        }
        margin = margin.min(second - first);
    }
    Some(margin)
}
