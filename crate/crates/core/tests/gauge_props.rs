use gmwp_core::gauge::{dual_gauge_value, gauge_value, project_l1_ball, prox_distance};
use gmwp_core::verify::{brute_prox, gauge_by_bisection, grid_minimize, prox_objective, support_by_enumeration, OracleConfig};
use gmwp_core::{center_representative, GaugeKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind() -> impl Strategy<Value = GaugeKind> {
    prop_oneof![Just(GaugeKind::L1), Just(GaugeKind::L2), Just(GaugeKind::LInf)]
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn vec_any_dim() -> impl Strategy<Value = Vec<f64>> {
    (1usize..8).prop_flat_map(vector)
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn positive_homogeneity(kind in kind(), v in vec_any_dim(), alpha in 0.0..100.0f64) {
        let scaled: Vec<f64> = v.iter().map(|x| alpha * x).collect();
        let lhs = gauge_value(kind, &scaled).unwrap();
        let rhs = alpha * gauge_value(kind, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn triangle_inequality(kind in kind(), (u, v) in (1usize..8).prop_flat_map(|n| (vector(n), vector(n)))) {
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let lhs = gauge_value(kind, &sum).unwrap();
        prop_assert!(lhs <= gauge_value(kind, &u).unwrap() + gauge_value(kind, &v).unwrap() + 1e-9);
    }

    #[test]
    fn definiteness(kind in kind(), v in vec_any_dim()) {
        let g = gauge_value(kind, &v).unwrap();
        prop_assert!(g >= 0.0);
        prop_assert_eq!(g == 0.0, v.iter().all(|&x| x == 0.0));
        prop_assert_eq!(gauge_value(kind, &vec![0.0; v.len()]).unwrap(), 0.0);
    }

    #[test]
    fn gauge_matches_bisection(kind in kind(), v in vec_any_dim()) {
        let g = gauge_value(kind, &v).unwrap();
        prop_assert!((g - gauge_by_bisection(kind, &v)).abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn dual_is_support_function(kind in kind(), v in vector(3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let support = support_by_enumeration(kind, &v, 20_000, &mut rng);
        let dual = dual_gauge_value(kind, &v).unwrap();
        // Sampling the ℓ2 sphere only approaches the supremum from below.
        prop_assert!(support <= dual + 1e-12);
        prop_assert!(dual - support <= 5e-3 * dual.max(1.0));
    }

    #[test]
    fn duality_is_exact(v in vec_any_dim()) {
        prop_assert_eq!(dual_gauge_value(GaugeKind::L1, &v).unwrap(), gauge_value(GaugeKind::LInf, &v).unwrap());
        prop_assert_eq!(dual_gauge_value(GaugeKind::LInf, &v).unwrap(), gauge_value(GaugeKind::L1, &v).unwrap());
        prop_assert_eq!(dual_gauge_value(GaugeKind::L2, &v).unwrap(), gauge_value(GaugeKind::L2, &v).unwrap());
    }

    #[test]
    fn norm_equivalence_sandwich(kind in kind(), v in vec_any_dim()) {
        let n = v.len();
        let g = gauge_value(kind, &v).unwrap();
        let e = euclid(&v);
        prop_assert!(g / kind.polar_radius(n) <= e * (1.0 + 1e-12) + 1e-12);
        prop_assert!(e <= kind.ball_radius(n) * g * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn prox_matches_oracle(kind in kind(), a in vector(2), z in vector(2), mu in 0.05..3.0f64) {
        let cfg = OracleConfig::default();
        let p = prox_distance(kind, &a, &z, mu).unwrap();
        let oracle = brute_prox(kind, &a, &z, mu, &cfg).unwrap();
        prop_assert!(dist2(&p, &oracle) <= 1e-4, "prox {:?} oracle {:?}", p, oracle);
        prop_assert!(
            prox_objective(kind, &a, &z, mu, &p) <= prox_objective(kind, &a, &z, mu, &oracle) + 1e-6
        );
    }

    #[test]
    fn prox_nonexpansive(kind in kind(), (a, z1, z2) in (1usize..6).prop_flat_map(|n| (vector(n), vector(n), vector(n))), mu in 0.01..5.0f64) {
        let p1 = prox_distance(kind, &a, &z1, mu).unwrap();
        let p2 = prox_distance(kind, &a, &z2, mu).unwrap();
        prop_assert!(dist2(&p1, &p2) <= dist2(&z1, &z2) + 1e-12);
        // Firm nonexpansiveness: ‖p1 − p2‖² ≤ ⟨p1 − p2, z1 − z2⟩.
        let dp: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| x - y).collect();
        let dz: Vec<f64> = z1.iter().zip(&z2).map(|(x, y)| x - y).collect();
        let inner: f64 = dp.iter().zip(&dz).map(|(x, y)| x * y).sum();
        prop_assert!(dp.iter().map(|x| x * x).sum::<f64>() <= inner + 1e-9);
    }

    #[test]
    fn l1_projection_feasible_and_idempotent(v in vec_any_dim(), radius in 0.01..20.0f64) {
        let p = project_l1_ball(&v, radius);
        let l1: f64 = p.iter().map(|x| x.abs()).sum();
        prop_assert!(l1 <= radius + 1e-12);
        let twice = project_l1_ball(&p, radius);
        for (x, y) in p.iter().zip(&twice) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
            prop_assert_eq!(&p, &v);
        }
    }

    #[test]
    fn l1_projection_is_nearest(v in vector(2), radius in 0.1..5.0f64) {
        let p = project_l1_ball(&v, radius);
        let cfg = OracleConfig::default();
        let penalty = |u: &[f64]| {
            let excess = (u[0].abs() + u[1].abs() - radius).max(0.0);
            dist2(u, &v) + 1e6 * excess
        };
        let (_, best) = grid_minimize(penalty, &[-radius, -radius], &[radius, radius], &cfg).unwrap();
        prop_assert!(dist2(&p, &v) <= best + 1e-4);
    }

    #[test]
    fn representative_minimizes_sum(
        kind in prop_oneof![Just(GaugeKind::L1), Just(GaugeKind::L2)],
        pts in prop::collection::vec(vector(2), 1..=7),
    ) {
        let c = center_representative(kind, &pts).unwrap();
        let cost = |x: &[f64]| pts.iter().map(|p| kind.distance(x, p)).sum::<f64>();
        let lo = [-10.0, -10.0];
        let hi = [10.0, 10.0];
        let (_, best) = grid_minimize(cost, &lo, &hi, &OracleConfig::default()).unwrap();
        prop_assert!(cost(&c) <= best + 1e-4, "rep {} grid {}", cost(&c), best);
    }

    #[test]
    fn midrange_minimizes_max_distance(pts in prop::collection::vec(vector(2), 1..=7)) {
        let c = center_representative(GaugeKind::LInf, &pts).unwrap();
        let worst = |x: &[f64]| pts.iter().map(|p| GaugeKind::LInf.distance(x, p)).fold(0.0f64, f64::max);
        let (_, best) = grid_minimize(worst, &[-10.0, -10.0], &[10.0, 10.0], &OracleConfig::default()).unwrap();
        prop_assert!(worst(&c) <= best + 1e-4);
    }

    #[test]
    fn midrange_of_two_points_minimizes_sum(a in vector(2), b in vector(2)) {
        let c = center_representative(GaugeKind::LInf, &[a.clone(), b.clone()]).unwrap();
        let sum = GaugeKind::LInf.distance(&c, &a) + GaugeKind::LInf.distance(&c, &b);
        prop_assert!(sum <= GaugeKind::LInf.distance(&a, &b) + 1e-12);
    }
}

#[test]
fn linf_prox_beats_literal_formula() {
    let (a, z, mu) = ([0.0, 0.0], [2.0, 1.0], 1.0);
    let p = prox_distance(GaugeKind::LInf, &a, &z, mu).unwrap();
    assert!(dist2(&p, &[1.0, 1.0]) < 1e-12);
    let ours = prox_objective(GaugeKind::LInf, &a, &z, mu, &p);
    // a + Π_{‖·‖₁ ≤ μ}(z − a)
    let literal = project_l1_ball(&z, mu);
    assert_eq!(literal, vec![1.0, 0.0]);
    let theirs = prox_objective(GaugeKind::LInf, &a, &z, mu, &literal);
    assert!((ours - 1.5).abs() < 1e-12);
    assert!((theirs - 2.0).abs() < 1e-12);
}

#[test]
fn midrange_is_not_the_linf_sum_minimizer() {
    // Two of three points coincide: the sum is minimized at the pair, not at
    // the midrange.
    let pts = [[0.0, 0.0], [0.0, 0.0], [10.0, 0.0]];
    let c = center_representative(GaugeKind::LInf, &pts).unwrap();
    assert_eq!(c, vec![5.0, 0.0]);
    let cost = |x: &[f64]| pts.iter().map(|p| GaugeKind::LInf.distance(x, p)).sum::<f64>();
    assert_eq!(cost(&c), 15.0);
    assert_eq!(cost(&[0.0, 0.0]), 10.0);
}
