//! Smoothed multi-source Weber objective.
//!
//! Each demand point `a^i` contributes `φ_i(x) = min_ℓ ρ_F(x^ℓ − a^i)`. Its Moreau
//! envelope is evaluated through the active block (the nearest center, smallest
//! index on ties): only that block is moved by the proximal map, so the gradient
//! of the smoothed objective is
//!
//! ```text
//! ∇_ℓ f^μ(x) = (1/μ) Σ_{i : active(i) = ℓ} (x^ℓ − prox_i)
//! ```
//!
//! with `prox_i = prox_{μ ρ_F(· − a^i)}(x^ℓ)`. All sums run over points in
//! ascending index order, so every quantity here is bit-deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{prox_distance_into, GaugeKind};

/// Row-major point storage shared by [`Dataset`] and [`CenterConfig`].
fn flatten(rows: Vec<Vec<f64>>, what: &str) -> Result<(usize, Vec<f64>)> {
    let dim = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::input(format!("{what} is empty")))?;
    if dim == 0 {
        return Err(Error::input(format!("{what} has dimension zero")));
    }
    let mut coords = Vec::with_capacity(dim * rows.len());
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::input(format!("{what} has non-finite entries")));
        }
        coords.extend(row);
    }
    Ok((dim, coords))
}

fn check_flat(dim: usize, coords: &[f64], what: &str) -> Result<()> {
    if dim == 0 {
        return Err(Error::input(format!("{what} has dimension zero")));
    }
    if coords.is_empty() || !coords.len().is_multiple_of(dim) {
        return Err(Error::input(format!(
            "{what}: {} coordinates do not form rows of dimension {dim}",
            coords.len()
        )));
    }
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(Error::input(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// `m ≥ 1` demand points in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let (dim, coords) = flatten(points, "dataset")?;
        Ok(Self { dim, coords })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_flat(dim, &coords, "dataset")?;
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }
}

/// `k ≥ 1` center blocks `x = (x¹, …, xᵏ)`, each in `ℝⁿ`.
///
/// The same shape is used for gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CenterConfig {
    dim: usize,
    coords: Vec<f64>,
}

impl CenterConfig {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        let (dim, coords) = flatten(blocks, "center configuration")?;
        Ok(Self { dim, coords })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_flat(dim, &coords, "center configuration")?;
        Ok(Self { dim, coords })
    }

    pub(crate) fn zeros(k: usize, dim: usize) -> Self {
        Self { dim, coords: vec![0.0; k * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn block(&self, l: usize) -> &[f64] {
        &self.coords[l * self.dim..(l + 1) * self.dim]
    }

    #[inline]
    pub fn block_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.coords[l * self.dim..(l + 1) * self.dim]
    }

    pub fn blocks(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_blocks(&self) -> Vec<Vec<f64>> {
        self.blocks().map(<[f64]>::to_vec).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    /// Euclidean norm of the flattened vector.
    pub fn norm(&self) -> f64 {
        GaugeKind::L2.norm(&self.coords)
    }

    /// Keep only the blocks for which `keep` is true, preserving order.
    pub(crate) fn retain_blocks(&mut self, keep: &[bool]) {
        let dim = self.dim;
        let mut write = 0;
        for (l, &kept) in keep.iter().enumerate() {
            if kept {
                if write != l {
                    self.coords.copy_within(l * dim..(l + 1) * dim, write * dim);
                }
                write += 1;
            }
        }
        self.coords.truncate(write * dim);
    }
}

impl TryFrom<Vec<Vec<f64>>> for CenterConfig {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<f64>>) -> Result<Self> {
        CenterConfig::new(blocks)
    }
}

impl From<CenterConfig> for Vec<Vec<f64>> {
    fn from(c: CenterConfig) -> Self {
        c.to_blocks()
    }
}

/// Natural clustering: `owner[i]` is the index of the center serving point `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub owner: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
}

impl Assignment {
    pub fn from_owner(owner: Vec<usize>, k: usize) -> Self {
        let mut cluster_sizes = vec![0; k];
        for &o in &owner {
            cluster_sizes[o] += 1;
        }
        Self { owner, cluster_sizes }
    }

    pub fn k(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn has_empty(&self) -> bool {
        self.cluster_sizes.contains(&0)
    }

    pub fn members(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        self.owner
            .iter()
            .enumerate()
            .filter(move |(_, &o)| o == l)
            .map(|(i, _)| i)
    }
}

/// Nearest center to `a` under `ρ_F(x^ℓ − a)`, smallest index on ties.
#[inline]
pub fn nearest_center(kind: GaugeKind, centers: &CenterConfig, a: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (l, block) in centers.blocks().enumerate() {
        let d = kind.distance(block, a);
        if d < best.1 {
            best = (l, d);
        }
    }
    best
}

pub fn assign_all(kind: GaugeKind, centers: &CenterConfig, data: &Dataset) -> Assignment {
    let owner = data.points().map(|a| nearest_center(kind, centers, a).0).collect();
    Assignment::from_owner(owner, centers.k())
}

/// Raw objective `f_F(x) = Σ_i min_ℓ ρ_F(x^ℓ − a^i)`.
pub fn objective_raw(kind: GaugeKind, centers: &CenterConfig, data: &Dataset) -> f64 {
    data.points().map(|a| nearest_center(kind, centers, a).1).sum()
}

/// One point's envelope value with its active block and proximal block.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeComponent {
    pub value: f64,
    pub active: usize,
    pub prox_block: Vec<f64>,
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("mu must be positive and finite, got {mu}")))
    }
}

fn check_dims(centers: &CenterConfig, dim: usize) -> Result<()> {
    if centers.dim() != dim {
        return Err(Error::DimensionMismatch { expected: centers.dim(), got: dim });
    }
    Ok(())
}

#[inline]
fn envelope_value(kind: GaugeKind, a: &[f64], center: &[f64], prox: &[f64], mu: f64) -> f64 {
    let sq: f64 = prox.iter().zip(center).map(|(p, c)| (p - c) * (p - c)).sum();
    kind.distance(prox, a) + sq / (2.0 * mu)
}

pub fn envelope_component(
    kind: GaugeKind,
    centers: &CenterConfig,
    a: &[f64],
    mu: f64,
) -> Result<EnvelopeComponent> {
    check_mu(mu)?;
    check_dims(centers, a.len())?;
    let (active, _) = nearest_center(kind, centers, a);
    let center = centers.block(active);
    let mut prox_block = vec![0.0; a.len()];
    prox_distance_into(kind, a, center, mu, &mut prox_block, &mut Vec::new());
    let value = envelope_value(kind, a, center, &prox_block, mu);
    Ok(EnvelopeComponent { value, active, prox_block })
}

/// Smoothed objective `f^μ_F(x) = Σ_i φ_i^μ(x)`.
pub fn envelope_objective(kind: GaugeKind, centers: &CenterConfig, data: &Dataset, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    check_dims(centers, data.dim())?;
    let assignment = assign_all(kind, centers, data);
    Ok(Smoother::new(kind, data.dim()).value(centers, data, &assignment, mu))
}

/// Gradient of [`envelope_objective`], returned in the shape of `centers`.
pub fn envelope_gradient(
    kind: GaugeKind,
    centers: &CenterConfig,
    data: &Dataset,
    mu: f64,
) -> Result<CenterConfig> {
    check_mu(mu)?;
    check_dims(centers, data.dim())?;
    let assignment = assign_all(kind, centers, data);
    let mut grad = CenterConfig::zeros(centers.k(), centers.dim());
    Smoother::new(kind, data.dim()).gradient(centers, data, &assignment, mu, &mut grad);
    Ok(grad)
}

/// Reusable buffers for envelope evaluations inside solver loops.
///
/// `assignment` must be the nearest-center assignment of `centers`; callers
/// that already hold it avoid recomputing it.
pub(crate) struct Smoother {
    kind: GaugeKind,
    prox: Vec<f64>,
    scratch: Vec<f64>,
}

impl Smoother {
    pub(crate) fn new(kind: GaugeKind, dim: usize) -> Self {
        Self { kind, prox: vec![0.0; dim], scratch: Vec::with_capacity(dim) }
    }

    pub(crate) fn value(&mut self, centers: &CenterConfig, data: &Dataset, assignment: &Assignment, mu: f64) -> f64 {
        let mut total = 0.0;
        for (a, &l) in data.points().zip(&assignment.owner) {
            let center = centers.block(l);
            prox_distance_into(self.kind, a, center, mu, &mut self.prox, &mut self.scratch);
            total += envelope_value(self.kind, a, center, &self.prox, mu);
        }
        total
    }

    pub(crate) fn gradient(
        &mut self,
        centers: &CenterConfig,
        data: &Dataset,
        assignment: &Assignment,
        mu: f64,
        grad: &mut CenterConfig,
    ) {
        grad.as_flat_mut().iter_mut().for_each(|g| *g = 0.0);
        for (a, &l) in data.points().zip(&assignment.owner) {
            let center = centers.block(l);
            prox_distance_into(self.kind, a, center, mu, &mut self.prox, &mut self.scratch);
            for ((g, &c), &p) in grad.block_mut(l).iter_mut().zip(center).zip(&self.prox) {
                *g += c - p;
            }
        }
        let inv = 1.0 / mu;
        grad.as_flat_mut().iter_mut().for_each(|g| *g *= inv);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn centers(blocks: &[&[f64]]) -> CenterConfig {
        CenterConfig::new(blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    fn data(points: &[&[f64]]) -> Dataset {
        Dataset::new(points.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn nearest_center_examples() {
        let c = centers(&[&[0.0, 0.0], &[10.0, 0.0]]);
        assert_eq!(nearest_center(GaugeKind::L2, &c, &[1.0, 0.0]), (0, 1.0));
        let c = centers(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(nearest_center(GaugeKind::L2, &c, &[1.0, 0.0]), (0, 1.0));
        let c = centers(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(nearest_center(GaugeKind::L1, &c, &[1.0, 0.0]), (0, 1.0));
    }

    #[test]
    fn assign_all_examples() {
        let d = data(&[&[0.0, 0.0], &[0.0, 1.0], &[10.0, 0.0], &[10.0, 1.0]]);
        let c = centers(&[&[0.0, 0.5], &[10.0, 0.5]]);
        let a = assign_all(GaugeKind::L2, &c, &d);
        assert_eq!(a.owner, vec![0, 0, 1, 1]);
        assert_eq!(a.cluster_sizes, vec![2, 2]);

        let c = centers(&[&[3.0, 3.0]]);
        let a = assign_all(GaugeKind::L1, &c, &d);
        assert_eq!(a.owner, vec![0; 4]);
        assert_eq!(a.cluster_sizes, vec![4]);

        // (1,0) sits at distance 1 from both centers.
        let d = data(&[&[-1.0, 0.0], &[1.0, 0.0], &[3.0, 0.0]]);
        let c = centers(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(assign_all(GaugeKind::L2, &c, &d).owner, vec![0, 0, 1]);
    }

    #[test]
    fn objective_raw_examples() {
        let pts: &[&[f64]] = &[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.5]];
        for kind in GaugeKind::ALL {
            assert_eq!(objective_raw(kind, &centers(pts), &data(pts)), 0.0);
        }
        let c = centers(&[&[0.0, 0.0]]);
        assert_eq!(objective_raw(GaugeKind::L2, &c, &data(&[&[3.0, 4.0], &[0.0, 0.0]])), 5.0);
        assert_eq!(objective_raw(GaugeKind::L1, &c, &data(&[&[1.0, 1.0]])), 2.0);
    }

    #[test]
    fn envelope_component_examples() {
        let c = centers(&[&[0.0, 0.0]]);
        let e = envelope_component(GaugeKind::L2, &c, &[3.0, 4.0], 1.0).unwrap();
        assert_eq!(e.active, 0);
        assert_abs_diff_eq!(e.prox_block[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(e.prox_block[1], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(e.value, 4.5, epsilon = 1e-12);

        for kind in GaugeKind::ALL {
            let c = centers(&[&[1.5, -2.0]]);
            let e = envelope_component(kind, &c, &[1.5, -2.0], 0.3).unwrap();
            assert_eq!(e.value, 0.0);
            assert_eq!(e.prox_block, vec![1.5, -2.0]);
        }

        let c = centers(&[&[2.0, 0.0]]);
        let e = envelope_component(GaugeKind::L1, &c, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(e.prox_block, vec![1.0, 0.0]);
        assert_eq!(e.value, 1.5);

        assert!(envelope_component(GaugeKind::L1, &c, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn envelope_objective_examples() {
        let pts: &[&[f64]] = &[&[1.0, 2.0], &[3.0, -1.0]];
        assert_eq!(envelope_objective(GaugeKind::L2, &centers(pts), &data(pts), 0.5).unwrap(), 0.0);

        let c = centers(&[&[0.0, 0.0]]);
        let d = data(&[&[3.0, 4.0]]);
        assert_abs_diff_eq!(envelope_objective(GaugeKind::L2, &c, &d, 0.8).unwrap(), 5.0 - 0.4, epsilon = 1e-12);

        let mu = 1e-8;
        let d = data(&[&[3.0, 4.0], &[-1.0, 2.0], &[0.0, 0.5]]);
        for kind in GaugeKind::ALL {
            let raw = objective_raw(kind, &c, &d);
            let env = envelope_objective(kind, &c, &d, mu).unwrap();
            assert!(env <= raw);
            assert!(raw - env <= 3.0 * mu * 5.0);
        }
    }

    #[test]
    fn envelope_gradient_examples() {
        let c = centers(&[&[0.0, 0.0]]);
        let g = envelope_gradient(GaugeKind::L2, &c, &data(&[&[3.0, 4.0]]), 1.0).unwrap();
        assert_abs_diff_eq!(g.block(0)[0], -0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(g.block(0)[1], -0.8, epsilon = 1e-12);

        let pts: &[&[f64]] = &[&[1.0, 2.0], &[3.0, -1.0]];
        for kind in GaugeKind::ALL {
            let g = envelope_gradient(kind, &centers(pts), &data(pts), 0.1).unwrap();
            assert!(g.as_flat().iter().all(|&x| x == 0.0));
        }

        // Second block owns nothing.
        let c = centers(&[&[0.0, 0.0], &[100.0, 100.0]]);
        let g = envelope_gradient(GaugeKind::L1, &c, &data(&[&[3.0, 4.0], &[1.0, 0.0]]), 1.0).unwrap();
        assert_eq!(g.block(1), &[0.0, 0.0]);
    }

    #[test]
    fn retain_blocks_preserves_order() {
        let mut c = centers(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        c.retain_blocks(&[false, true, false, true]);
        assert_eq!(c.to_blocks(), vec![vec![1.0], vec![3.0]]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Dataset::new(vec![]).is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Dataset::new(vec![vec![f64::NAN]]).is_err());
        assert!(CenterConfig::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
        let c = centers(&[&[0.0, 0.0]]);
        assert!(envelope_objective(GaugeKind::L2, &c, &data(&[&[1.0]]), 1.0).is_err());
    }
}
