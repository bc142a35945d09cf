//! Minkowski gauges of the ℓ1, ℓ2 and ℓ∞ unit balls.
//!
//! For a symmetric unit ball `F` the gauge `ρ_F(x) = inf{t ≥ 0 : x ∈ tF}` is the
//! corresponding norm, and the gauge of the polar set is the dual norm. This
//! module provides the gauges, the proximal map of `y ↦ ρ_F(y − a)`, the
//! Euclidean projection onto the ℓ1 ball, and the per-gauge "center" of a point
//! set used when clusters are merged.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Weiszfeld stopping tolerance (iterate displacement).
pub const GEOMETRIC_MEDIAN_TOL: f64 = 1e-9;
/// Default Weiszfeld iteration cap.
pub const GEOMETRIC_MEDIAN_MAX_ITER: usize = 1000;

/// Which unit ball defines the distance `ρ_F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeKind {
    L1,
    L2,
    #[serde(rename = "linf")]
    LInf,
}

impl GaugeKind {
    pub const ALL: [GaugeKind; 3] = [GaugeKind::L1, GaugeKind::L2, GaugeKind::LInf];

    /// Gauge of `v` with respect to the unit ball. No dimension check.
    #[inline]
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            GaugeKind::L1 => v.iter().map(|x| x.abs()).sum(),
            GaugeKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            GaugeKind::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// `ρ_F(x − a)` without allocating.
    #[inline]
    pub fn distance(self, x: &[f64], a: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), a.len());
        let diffs = x.iter().zip(a).map(|(xi, ai)| xi - ai);
        match self {
            GaugeKind::L1 => diffs.map(f64::abs).sum(),
            GaugeKind::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            GaugeKind::LInf => diffs.fold(0.0, |m, d| m.max(d.abs())),
        }
    }

    /// The gauge whose unit ball is the polar of this one.
    pub fn dual(self) -> GaugeKind {
        match self {
            GaugeKind::L1 => GaugeKind::LInf,
            GaugeKind::L2 => GaugeKind::L2,
            GaugeKind::LInf => GaugeKind::L1,
        }
    }

    /// Support function of the unit ball, i.e. the dual norm.
    #[inline]
    pub fn dual_norm(self, v: &[f64]) -> f64 {
        self.dual().norm(v)
    }

    /// `‖F‖`: largest Euclidean norm of a point of the unit ball in dimension `n`.
    pub fn ball_radius(self, n: usize) -> f64 {
        match self {
            GaugeKind::L1 | GaugeKind::L2 => 1.0,
            GaugeKind::LInf => (n as f64).sqrt(),
        }
    }

    /// `‖F°‖`: largest Euclidean norm of a point of the polar ball. This is also
    /// the Lipschitz constant of the gauge.
    pub fn polar_radius(self, n: usize) -> f64 {
        self.dual().ball_radius(n)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GaugeKind::L1 => "l1",
            GaugeKind::L2 => "l2",
            GaugeKind::LInf => "linf",
        }
    }
}

impl fmt::Display for GaugeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GaugeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(GaugeKind::L1),
            "l2" => Ok(GaugeKind::L2),
            "linf" | "l-inf" | "inf" => Ok(GaugeKind::LInf),
            other => Err(Error::param(format!("unknown gauge '{other}' (expected l1, l2, linf)"))),
        }
    }
}

fn check_vector(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::input("vector has dimension zero"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("vector has non-finite entries"));
    }
    Ok(())
}

fn check_same_dim(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(())
}

/// `ρ_F(v)`.
pub fn gauge_value(kind: GaugeKind, v: &[f64]) -> Result<f64> {
    check_vector(v)?;
    Ok(kind.norm(v))
}

/// `ρ_{F°}(v) = max_{u ∈ F} ⟨v, u⟩`.
pub fn dual_gauge_value(kind: GaugeKind, v: &[f64]) -> Result<f64> {
    check_vector(v)?;
    Ok(kind.dual_norm(v))
}

/// Proximal point of `y ↦ ρ_F(y − a)` at `z` with parameter `mu`:
/// the unique minimizer of `ρ_F(y − a) + ‖y − z‖² / (2 mu)`.
pub fn prox_distance(kind: GaugeKind, a: &[f64], z: &[f64], mu: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::param(format!("mu must be positive and finite, got {mu}")));
    }
    check_vector(a)?;
    check_vector(z)?;
    check_same_dim(a, z)?;
    let mut out = vec![0.0; a.len()];
    let mut scratch = Vec::new();
    prox_distance_into(kind, a, z, mu, &mut out, &mut scratch);
    Ok(out)
}

/// Allocation-free form of [`prox_distance`]. `scratch` is only used by ℓ∞.
pub(crate) fn prox_distance_into(
    kind: GaugeKind,
    a: &[f64],
    z: &[f64],
    mu: f64,
    out: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    match kind {
        GaugeKind::L1 => {
            for ((o, &ai), &zi) in out.iter_mut().zip(a).zip(z) {
                let d = zi - ai;
                *o = ai + d.signum() * (d.abs() - mu).max(0.0);
            }
        }
        GaugeKind::L2 => {
            let norm = GaugeKind::L2.distance(z, a);
            if norm <= mu {
                out.copy_from_slice(a);
            } else {
                let shrink = 1.0 - mu / norm;
                for ((o, &ai), &zi) in out.iter_mut().zip(a).zip(z) {
                    *o = ai + shrink * (zi - ai);
                }
            }
        }
        GaugeKind::LInf => {
            // Moreau decomposition: prox of the ℓ∞ norm is the identity minus the
            // projection onto the ℓ1 ball of radius mu.
            scratch.clear();
            scratch.extend(z.iter().zip(a).map(|(zi, ai)| (zi - ai).abs()));
            let theta = l1_ball_threshold(scratch, mu);
            for ((o, &ai), &zi) in out.iter_mut().zip(a).zip(z) {
                let d = zi - ai;
                *o = zi - d.signum() * (d.abs() - theta).max(0.0);
            }
        }
    }
}

/// Soft-threshold level `θ` such that `sign(v)·(|v| − θ)₊` is the projection onto
/// the ℓ1 ball of `radius`; `abs` holds `|v|` and is reordered in place.
/// Returns 0 when `v` is already inside the ball.
fn l1_ball_threshold(abs: &mut [f64], radius: f64) -> f64 {
    let l1: f64 = abs.iter().sum();
    if l1 <= radius {
        return 0.0;
    }
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in abs.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    theta
}

/// Euclidean projection of `v` onto `{u : ‖u‖₁ ≤ radius}`.
///
/// Exact sort-and-threshold algorithm, `O(n log n)`. A nonpositive radius
/// projects onto the origin.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    let mut scratch = Vec::new();
    project_l1_ball_into(v, radius, &mut out, &mut scratch);
    out
}

pub(crate) fn project_l1_ball_into(v: &[f64], radius: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
    if radius <= 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    scratch.clear();
    scratch.extend(v.iter().map(|x| x.abs()));
    let theta = l1_ball_threshold(scratch, radius);
    for (o, &x) in out.iter_mut().zip(v) {
        *o = x.signum() * (x.abs() - theta).max(0.0);
    }
}

fn check_points<P: AsRef<[f64]>>(points: &[P]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::input("point list is empty"))?
        .as_ref();
    let dim = first.len();
    if dim == 0 {
        return Err(Error::input("points have dimension zero"));
    }
    for p in points {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
    }
    Ok(dim)
}

/// Representative center of a point set under the given gauge:
/// componentwise lower median (ℓ1), geometric median (ℓ2), componentwise
/// midrange (ℓ∞).
pub fn center_representative<P: AsRef<[f64]>>(kind: GaugeKind, points: &[P]) -> Result<Vec<f64>> {
    let dim = check_points(points)?;
    match kind {
        GaugeKind::L1 => {
            let mut column = Vec::with_capacity(points.len());
            Ok((0..dim)
                .map(|c| {
                    column.clear();
                    column.extend(points.iter().map(|p| p.as_ref()[c]));
                    column.sort_unstable_by(f64::total_cmp);
                    column[(column.len() - 1) / 2]
                })
                .collect())
        }
        GaugeKind::L2 => geometric_median(points, GEOMETRIC_MEDIAN_TOL, GEOMETRIC_MEDIAN_MAX_ITER),
        GaugeKind::LInf => Ok((0..dim)
            .map(|c| {
                let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let x = p.as_ref()[c];
                    (lo.min(x), hi.max(x))
                });
                0.5 * (lo + hi)
            })
            .collect()),
    }
}

/// Geometric median (minimizer of `Σ_p ‖x − a^p‖₂`) by Weiszfeld iteration.
///
/// Starts from the mean. When an iterate falls within `tol` of a data point the
/// subgradient test decides whether that point is optimal; if it is not, the
/// Vardi–Zhang step moves the iterate off it.
pub fn geometric_median<P: AsRef<[f64]>>(points: &[P], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let dim = check_points(points)?;
    let count = points.len() as f64;
    let mut x = vec![0.0; dim];
    for p in points {
        for (xi, &pi) in x.iter_mut().zip(p.as_ref()) {
            *xi += pi;
        }
    }
    x.iter_mut().for_each(|xi| *xi /= count);
    if points.len() == 1 {
        return Ok(x);
    }

    let mut num = vec![0.0; dim];
    let mut pull = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    for _ in 0..max_iter {
        num.iter_mut().for_each(|v| *v = 0.0);
        pull.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        let mut coincident = 0usize;
        for p in points {
            let p = p.as_ref();
            let d = GaugeKind::L2.distance(&x, p);
            if d < tol {
                coincident += 1;
                continue;
            }
            let w = 1.0 / d;
            den += w;
            for ((n, pu), (&pi, &xi)) in num.iter_mut().zip(pull.iter_mut()).zip(p.iter().zip(&x)) {
                *n += w * pi;
                *pu += w * (pi - xi);
            }
        }

        if den == 0.0 {
            // Every point coincides with x.
            return Ok(x);
        }
        let weiszfeld = num.iter().map(|n| n / den);
        if coincident == 0 {
            for (nx, t) in next.iter_mut().zip(weiszfeld) {
                *nx = t;
            }
        } else {
            // `pull` is minus a subgradient of the non-coincident terms at x.
            let pull_norm = GaugeKind::L2.norm(&pull);
            let w = coincident as f64;
            if pull_norm <= w {
                return Ok(x);
            }
            let keep = w / pull_norm;
            for ((nx, t), &xi) in next.iter_mut().zip(weiszfeld).zip(&x) {
                *nx = (1.0 - keep) * t + keep * xi;
            }
        }
        let step = GaugeKind::L2.distance(&next, &x);
        std::mem::swap(&mut x, &mut next);
        if step <= tol {
            break;
        }
    }
    Ok(x)
}
