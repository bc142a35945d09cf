//! Fixtures shared by the criterion benches.

use gmwp_core::{generate_synthetic, init_centers, CenterConfig, Dataset, SyntheticSpec};

/// Default six-cluster synthetic set (300 points in the plane).
pub fn synthetic() -> Dataset {
    generate_synthetic(&SyntheticSpec::default()).expect("default spec is valid").dataset
}

/// Synthetic set with `per` points per cluster.
pub fn synthetic_sized(per: usize) -> Dataset {
    let spec = SyntheticSpec { points_per_cluster: per, ..Default::default() };
    generate_synthetic(&spec).expect("valid spec").dataset
}

pub fn centers(data: &Dataset, k: usize, seed: u64) -> CenterConfig {
    init_centers(data, k, seed).expect("k <= m")
}
