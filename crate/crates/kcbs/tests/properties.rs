//! Property tests for the invariants that hold across the whole input
//! space: arbitrary mixtures, arbitrary bases, arbitrary bias strengths,
//! plus the statistical convergence law of the Monte Carlo driver.

use proptest::prelude::*;

use kcbs::charts::{enumerate_charts, is_valid_chart, ChartClass};
use kcbs::experiment::{run_trials, ModelSpec, PairingScheme};
use kcbs::geometry::{build_pentagram, UnitVector3, Vector3, VertexId};
use kcbs::lhv::{
    biased_klyachko_sum, biased_marginals, klyachko_sum, marginal_polytope_vertices,
    mixture_marginal, pentagon_sum, BiasSpec, MixtureWeights,
};
use kcbs::quantum::{canonical_entangled_state, joint_distribution, make_entangled_state};

const TOL: f64 = 1e-12;

proptest! {
    #[test]
    fn klyachko_sum_never_exceeds_two(raw in prop::array::uniform11(0.0f64..1.0)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let mixture = MixtureWeights::normalized(raw).unwrap();
        let sum = klyachko_sum(&mixture);
        prop_assert!(sum <= 2.0 + TOL, "sum {sum}");
        // Second route: the sum is linear in the weights with per-chart
        // coefficient equal to the chart's number of 1s.
        let direct: f64 = enumerate_charts()
            .iter()
            .zip(mixture.weights())
            .map(|(chart, w)| w * f64::from(chart.ones() as u8))
            .sum();
        prop_assert!((sum - direct).abs() < TOL);
    }

    #[test]
    fn marginals_and_joints_are_probabilities(raw in prop::array::uniform11(0.0f64..1.0)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let mixture = MixtureWeights::normalized(raw).unwrap();
        for v in VertexId::all() {
            let m = mixture_marginal(&mixture, v);
            prop_assert!((-TOL..=1.0 + TOL).contains(&m));
        }
        let p = pentagon_sum(&mixture);
        prop_assert!((-TOL..=1.0 + TOL).contains(&p));
    }

    #[test]
    fn pentagon_sum_equals_two_one_class_mass(raw in prop::array::uniform11(0.0f64..1.0)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let mixture = MixtureWeights::normalized(raw).unwrap();
        let c2_mass: f64 = enumerate_charts()
            .iter()
            .zip(mixture.weights())
            .filter(|(chart, _)| chart.class() == ChartClass::C2)
            .map(|(_, w)| w)
            .sum();
        prop_assert!((pentagon_sum(&mixture) - c2_mass).abs() < TOL);
    }

    #[test]
    fn chart_validity_matches_reference_rule(values in prop::array::uniform5(0u8..3)) {
        let binary = values.iter().all(|&v| v <= 1);
        let no_adjacent_ones = (0..5).all(|i| {
            !(values[i] == 1 && values[(i + 1) % 5] == 1)
        });
        prop_assert_eq!(is_valid_chart(values), binary && no_adjacent_ones);
    }

    #[test]
    fn convex_combinations_stay_in_the_pentagon_window(raw in prop::array::uniform6(0.0f64..1.0)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let total: f64 = raw.iter().sum();
        let vertices = marginal_polytope_vertices();
        let mut combined = [0.0f64; 11];
        for (coeff, vertex) in raw.iter().zip(&vertices) {
            for (c, w) in combined.iter_mut().zip(vertex.weights()) {
                *c += coeff / total * w;
            }
        }
        let mixture = MixtureWeights::new(combined).unwrap();
        let sum = pentagon_sum(&mixture);
        prop_assert!(sum >= 2.0 / 3.0 - 1e-9, "sum {sum}");
        prop_assert!(sum <= 5.0 / 6.0 + 1e-9, "sum {sum}");
        for v in VertexId::all() {
            prop_assert!((mixture_marginal(&mixture, v) - 1.0 / 3.0).abs() < 1e-9);
        }
        prop_assert!((klyachko_sum(&mixture) - 5.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn endpoint_bias_marginals_track_the_group_probability(p in 0.0f64..=0.5) {
        let bias = BiasSpec::endpoint_weighted(p).unwrap();
        for marginal in biased_marginals(&bias) {
            prop_assert!((marginal - p).abs() < TOL);
        }
        prop_assert!((biased_klyachko_sum(&bias) - 5.0 * p).abs() < TOL);
    }

    #[test]
    fn entangled_state_ignores_basis_rotations(
        alpha in 0.0f64..std::f64::consts::TAU,
        beta in 0.0f64..std::f64::consts::TAU,
        gamma in 0.0f64..std::f64::consts::TAU,
    ) {
        let rotate = |u: UnitVector3| u.rotated_z(alpha).rotated_x(beta).rotated_z(gamma);
        let e1 = UnitVector3::new(Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let e2 = UnitVector3::new(Vector3::new(0.0, 1.0, 0.0)).unwrap();
        let e3 = UnitVector3::new(Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let state = make_entangled_state(&[rotate(e1), rotate(e2), rotate(e3)]).unwrap();
        let canonical = canonical_entangled_state();
        for (row, canon_row) in state.amplitudes().iter().zip(canonical.amplitudes()) {
            for (a, b) in row.iter().zip(canon_row) {
                prop_assert!((a - b).abs() < TOL);
            }
        }
        // End to end: the physical prediction is unchanged too.
        let frame = build_pentagram();
        let v1 = VertexId::new(1).unwrap();
        let v3 = VertexId::new(3).unwrap();
        let p = joint_distribution(&state, &frame, v1, v3).p11;
        prop_assert!((p - (3.0 - 5f64.sqrt()) / 6.0).abs() < TOL);
    }
}

/// Least-squares slope of y against x.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    cov / var
}

#[test]
fn monte_carlo_error_shrinks_as_inverse_root_n() {
    let exact = 5.0 * (3.0 - 5f64.sqrt()) / 6.0;
    let seeds: Vec<u64> = (0..12).map(|k| 1000 + k).collect();
    let mut points = Vec::new();
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let mut sq = 0.0;
        for &seed in &seeds {
            let stats = run_trials(&ModelSpec::Quantum, PairingScheme::Pentagon, n, seed).unwrap();
            let err = stats.pentagon_sum.unwrap().value - exact;
            sq += err * err;
        }
        let rms = (sq / seeds.len() as f64).sqrt();
        points.push(((n as f64).ln(), rms.ln()));
    }
    let s = slope(&points);
    assert!(
        (-0.65..=-0.35).contains(&s),
        "root-mean-square error slope {s}, points {points:?}"
    );
}
