//! Moreau-envelope smoothing for the multi-source Weber problem.
//!
//! Given demand points `a¹, …, aᵐ ∈ ℝⁿ` and a gauge `ρ_F` (ℓ1, ℓ2 or ℓ∞), the
//! goal is to place centers `x¹, …, xᵏ` minimizing
//!
//! ```text
//! f_F(x) = Σ_i min_ℓ ρ_F(x^ℓ − a^i).
//! ```
//!
//! Each `min` term is replaced by its Moreau envelope with parameter `μ`, which
//! is differentiable wherever the nearest center is unique. The solvers run
//! gradient descent on the smoothed sum over a decreasing `μ` schedule,
//! deleting centers that lose all their points ([`solve_fixed`]) and optionally
//! merging nearby centers under a per-center penalty ([`solve_adaptive`]).

// Parameter checks use `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod envelope;
pub mod error;
pub mod gauge;
pub mod metrics;
pub mod solver_adaptive;
pub mod solver_fixed;
pub mod verify;

pub use data::{
    generate_synthetic, init_centers, load_csv, LabelColumn, LabeledDataset, MeanLayout, SyntheticSpec,
    RNG_ALGORITHM,
};
pub use envelope::{
    assign_all, envelope_component, envelope_gradient, envelope_objective, nearest_center, objective_raw,
    Assignment, CenterConfig, Dataset, EnvelopeComponent,
};
pub use error::{Error, Result};
pub use gauge::{
    center_representative, dual_gauge_value, gauge_value, geometric_median, project_l1_ball, prox_distance,
    GaugeKind,
};
pub use metrics::{accuracy, aggregate, best_of, matched_accuracy, RunAggregate, RunSummary};
pub use solver_adaptive::{
    attempt_merges, merge_threshold, merged_center, pairwise_center_distances, solve_adaptive, MergeEvent,
    MergeOutcome, MergeParams,
};
pub use solver_fixed::{
    delete_empty_clusters, gradient_step, solve_fixed, solve_fixed_stage, SolveParams, SolveReport, StageTrace,
    REPORT_SCHEMA_VERSION,
};
