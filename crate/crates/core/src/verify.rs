//! Brute-force oracles used to check the closed-form routines.
//!
//! Nothing here calls the proximal formulas in [`crate::gauge`]: minimizers are
//! found by nested grid refinement, gauges by bisection on the unit-ball
//! membership test, support functions by vertex enumeration or sampling, and
//! gradients by central differences of the smoothed objective.

use rand::Rng;

use crate::envelope::{envelope_objective, nearest_center, CenterConfig, Dataset};
use crate::error::{Error, Result};
use crate::gauge::GaugeKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Grid points per axis per refinement pass.
    pub grid_resolution: usize,
    pub passes: usize,
    /// Cell-size ratio between consecutive passes, in (0, 1).
    pub shrink: f64,
    pub fd_step: f64,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { grid_resolution: 50, passes: 30, shrink: 0.5, fd_step: 1e-5, tolerance: 1e-4 }
    }
}

/// Minimize `f` over the box `[lo, hi]` (at most three dimensions) by nested
/// grid refinement. The first pass covers the box; each later pass lays an
/// odd grid of `shrink`-times smaller cells centered on the best point so
/// far. Keeping the incumbent on the grid lets a pass improve one coordinate
/// while another stays on a kink, and the slow shrink lets the search follow
/// narrow curved valleys.
pub fn grid_minimize<F>(f: F, lo: &[f64], hi: &[f64], cfg: &OracleConfig) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = lo.len();
    if dim == 0 || dim != hi.len() {
        return Err(Error::input("grid box has inconsistent dimensions"));
    }
    if dim > 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if !(cfg.shrink > 0.0 && cfg.shrink < 1.0) {
        return Err(Error::param(format!("grid shrink must lie in (0, 1), got {}", cfg.shrink)));
    }
    let res = cfg.grid_resolution.max(2);
    let mut best = lo.to_vec();
    let mut best_val = f(&best);
    let mut point = vec![0.0; dim];

    let mut scan = |origin: &[f64], step: &[f64], count: usize, best: &mut Vec<f64>, best_val: &mut f64| {
        for flat in 0..count.pow(dim as u32) {
            let mut rem = flat;
            for c in 0..dim {
                point[c] = origin[c] + (rem % count) as f64 * step[c];
                rem /= count;
            }
            let v = f(&point);
            if v < *best_val {
                *best_val = v;
                best.copy_from_slice(&point);
            }
        }
    };

    let mut step: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| (h - l) / (res - 1) as f64).collect();
    scan(lo, &step, res, &mut best, &mut best_val);
    let half = (res / 2).max(1);
    for _ in 1..cfg.passes.max(1) {
        for s in step.iter_mut() {
            *s *= cfg.shrink;
        }
        let origin: Vec<f64> = best.iter().zip(&step).map(|(b, s)| b - half as f64 * s).collect();
        scan(&origin, &step, 2 * half + 1, &mut best, &mut best_val);
    }
    Ok((best, best_val))
}

/// Objective minimized by the distance prox.
pub fn prox_objective(kind: GaugeKind, a: &[f64], z: &[f64], mu: f64, y: &[f64]) -> f64 {
    let sq: f64 = y.iter().zip(z).map(|(yi, zi)| (yi - zi) * (yi - zi)).sum();
    kind.distance(y, a) + sq / (2.0 * mu)
}

/// Grid minimizer of `ρ_F(y − a) + ‖y − z‖² / (2μ)`.
///
/// Optimality gives `z − y ∈ μ ∂ρ_F(y − a)`, and every subgradient of the three
/// gauges has coordinates in `[−1, 1]`, so the search box is `z ± μ`.
pub fn brute_prox(kind: GaugeKind, a: &[f64], z: &[f64], mu: f64, cfg: &OracleConfig) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(Error::param("mu must be positive"));
    }
    if a.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: z.len() });
    }
    let pad = 1.05 * mu;
    let lo: Vec<f64> = z.iter().map(|x| x - pad).collect();
    let hi: Vec<f64> = z.iter().map(|x| x + pad).collect();
    let (y, val) = grid_minimize(|y| prox_objective(kind, a, z, mu, y), &lo, &hi, cfg)?;
    // The minimizer may be exactly `a` (the kink), which a grid rarely hits.
    if prox_objective(kind, a, z, mu, a) <= val {
        return Ok(a.to_vec());
    }
    Ok(y)
}

/// `inf{t ≥ 0 : v ∈ tF}` by bisection on the unit-ball membership test.
pub fn gauge_by_bisection(kind: GaugeKind, v: &[f64]) -> f64 {
    let inside = |t: f64| -> bool {
        let scaled = v.iter().map(|x| x / t);
        match kind {
            GaugeKind::L1 => scaled.map(f64::abs).sum::<f64>() <= 1.0,
            GaugeKind::L2 => scaled.map(|x| x * x).sum::<f64>() <= 1.0,
            GaugeKind::LInf => scaled.fold(0.0f64, |m, x| m.max(x.abs())) <= 1.0,
        }
    };
    if v.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !inside(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `max_{u ∈ F} ⟨v, u⟩`. Exact for the polytopes (maximum over vertices);
/// for the ℓ2 ball it is the best of `samples` random unit directions, a lower
/// bound that tightens as `samples` grows.
pub fn support_by_enumeration<R: Rng>(kind: GaugeKind, v: &[f64], samples: usize, rng: &mut R) -> f64 {
    let n = v.len();
    let dot = |u: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    match kind {
        GaugeKind::L1 => {
            let mut best = 0.0f64;
            let mut e = vec![0.0; n];
            for i in 0..n {
                for s in [1.0, -1.0] {
                    e[i] = s;
                    best = best.max(dot(&e));
                }
                e[i] = 0.0;
            }
            best
        }
        GaugeKind::LInf => {
            assert!(n <= 20, "vertex enumeration limited to 20 dimensions");
            let mut best = f64::NEG_INFINITY;
            let mut u = vec![0.0; n];
            for mask in 0u32..(1 << n) {
                for (i, ui) in u.iter_mut().enumerate() {
                    *ui = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                }
                best = best.max(dot(&u));
            }
            best
        }
        GaugeKind::L2 => {
            let mut best = 0.0f64;
            let mut u = vec![0.0; n];
            for _ in 0..samples {
                for ui in u.iter_mut() {
                    *ui = rng.sample::<f64, _>(rand_distr::StandardNormal);
                }
                let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    best = best.max(dot(&u) / norm);
                }
            }
            best
        }
    }
}

/// Central finite differences of the smoothed objective, one coordinate at a time.
pub fn fd_gradient(
    kind: GaugeKind,
    centers: &CenterConfig,
    data: &Dataset,
    mu: f64,
    step: f64,
) -> Result<CenterConfig> {
    let mut grad = centers.clone();
    let mut probe = centers.clone();
    for c in 0..centers.as_flat().len() {
        let x = centers.as_flat()[c];
        probe.as_flat_mut()[c] = x + step;
        let up = envelope_objective(kind, &probe, data, mu)?;
        probe.as_flat_mut()[c] = x - step;
        let down = envelope_objective(kind, &probe, data, mu)?;
        probe.as_flat_mut()[c] = x;
        grad.as_flat_mut()[c] = (up - down) / (2.0 * step);
    }
    Ok(grad)
}

/// True when every point's nearest center wins by at least `tie_gap` and every
/// active distance stays outside `[μ/2, 2μ]`, away from the envelope's kink.
/// Finite differences are reliable at such configurations.
pub fn is_nondegenerate(kind: GaugeKind, centers: &CenterConfig, data: &Dataset, mu: f64, tie_gap: f64) -> bool {
    data.points().all(|a| {
        let (active, d) = nearest_center(kind, centers, a);
        let clear = centers
            .blocks()
            .enumerate()
            .all(|(l, b)| l == active || kind.distance(b, a) - d >= tie_gap);
        clear && (d < 0.5 * mu || d > 2.0 * mu)
    })
}

/// Block selected by the exact proximal map of `φ(x) = min_ℓ ρ_F(x^ℓ − a)`:
/// the block with the smallest per-block envelope value (smallest index on
/// ties), together with that value. Envelope values come from [`brute_prox`].
pub fn exact_block_prox(
    kind: GaugeKind,
    centers: &CenterConfig,
    a: &[f64],
    mu: f64,
    cfg: &OracleConfig,
) -> Result<(usize, f64)> {
    let mut best = (0, f64::INFINITY);
    for (l, block) in centers.blocks().enumerate() {
        let y = brute_prox(kind, a, block, mu, cfg)?;
        let v = prox_objective(kind, a, block, mu, &y);
        if v < best.1 {
            best = (l, v);
        }
    }
    Ok(best)
}
