//! Property tests for the structural invariants: convexity of the
//! objective on the monotone cone, nonnegativity of the relative entropy,
//! the uniform-measure identity between the entropy and the log barrier,
//! and the projection laws of the sticky baseline.

mod common;

use igr1d::*;
use proptest::prelude::*;

fn map_from_increments(grid: &Grid, increments: &[f64]) -> MonotoneMap {
    let total: f64 = increments.iter().sum();
    let span = grid.b() - grid.a();
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    values.push(grid.a());
    for inc in &increments[..increments.len() - 1] {
        acc += inc;
        values.push(grid.a() + span * acc / total);
    }
    values.push(grid.b());
    MonotoneMap::new(grid, values).unwrap()
}

fn strict_increments(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..1.0, n)
}

fn loose_increments(n: usize) -> impl Strategy<Value = Vec<f64>> {
    // allows near-flat cells; at least one must be positive for a valid map
    proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], n).prop_filter(
        "needs positive total",
        |v| {
            v.iter().sum::<f64>() > 0.1
                && v.first().copied().unwrap_or(0.0) > 0.0
                && v.last().copied().unwrap_or(0.0) > 0.0
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_midpoint_convex_on_the_cone(
        inc1 in strict_increments(16),
        inc2 in strict_increments(16),
        lambda in 0.05f64..0.95,
        t in 0.0f64..1.0,
    ) {
        let grid = Grid::uniform(0.0, 1.0, 16).unwrap();
        let mu = DiscreteMeasure::uniform(&grid);
        let params = IgrParams::new(0.07).unwrap();
        let u0: Vec<f64> = grid.nodes().iter()
            .map(|x| 0.5 * (std::f64::consts::PI * x).sin())
            .collect();
        let data = make_regularized_data(&u0, &params, &mu, &grid).unwrap();
        let phi1 = map_from_increments(&grid, &inc1);
        let phi2 = map_from_increments(&grid, &inc2);
        let blended: Vec<f64> = phi1.values().iter().zip(phi2.values())
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let phi_blend = MonotoneMap::new(&grid, blended).unwrap();
        let f1 = objective_hat(&phi1, &data, t, &params, &mu, &grid).expect_finite();
        let f2 = objective_hat(&phi2, &data, t, &params, &mu, &grid).expect_finite();
        let fb = objective_hat(&phi_blend, &data, t, &params, &mu, &grid).expect_finite();
        prop_assert!(fb <= lambda * f1 + (1.0 - lambda) * f2 + 1e-12);
    }

    #[test]
    fn relative_entropy_is_nonnegative(inc in loose_increments(24)) {
        let grid = Grid::uniform(0.0, 1.0, 24).unwrap();
        let mu = DiscreteMeasure::uniform(&grid);
        let phi = map_from_increments(&grid, &inc);
        match kl_pushforward(&phi, &mu, &grid) {
            ObjectiveValue::Finite(v) => prop_assert!(v >= -1e-12, "KL = {v}"),
            ObjectiveValue::PlusInfinity => {}
        }
    }

    #[test]
    fn relative_entropy_nonnegative_under_nonuniform_measure(inc in strict_increments(24)) {
        let grid = Grid::uniform(0.0, 1.0, 24).unwrap();
        let density: Vec<f64> = grid.nodes().iter().map(|x| 1.0 + 0.8 * x).collect();
        let mu = DiscreteMeasure::from_density(&grid, &density).unwrap();
        let phi = map_from_increments(&grid, &inc);
        if let ObjectiveValue::Finite(v) = kl_pushforward(&phi, &mu, &grid) {
            // discrete quadrature slack scales with the interpolation error
            prop_assert!(v >= -1e-3, "KL = {v}");
        }
    }

    #[test]
    fn uniform_measure_entropy_equals_log_barrier(inc in strict_increments(32)) {
        let grid = Grid::uniform(0.0, 1.0, 32).unwrap();
        let mu = DiscreteMeasure::uniform(&grid);
        let phi = map_from_increments(&grid, &inc);
        let kl = kl_pushforward(&phi, &mu, &grid).expect_finite();
        let barrier: f64 = phi.cell_derivatives(&grid).iter()
            .zip(mu.cell_mass())
            .map(|(d, m)| -m * d.ln())
            .sum();
        prop_assert!((kl - barrier).abs() <= 1e-10, "kl {kl} vs barrier {barrier}");
    }

    #[test]
    fn isotonic_projection_is_idempotent_and_monotone(
        targets in proptest::collection::vec(-2.0f64..2.0, 2..40),
        seed in 0u64..1000,
    ) {
        let mut rng = common::seeded_rng(seed);
        use rand::Rng;
        let weights: Vec<f64> = (0..targets.len()).map(|_| rng.gen_range(0.1..2.0)).collect();
        let y = isotonic_projection(&targets, &weights).unwrap();
        for w in y.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        let z = isotonic_projection(&y, &weights).unwrap();
        prop_assert_eq!(y, z);
    }

    #[test]
    fn isotonic_projection_is_nonexpansive(
        targets1 in proptest::collection::vec(-2.0f64..2.0, 16),
        targets2 in proptest::collection::vec(-2.0f64..2.0, 16),
    ) {
        let weights = vec![1.0; 16];
        let y1 = isotonic_projection(&targets1, &weights).unwrap();
        let y2 = isotonic_projection(&targets2, &weights).unwrap();
        let d_out: f64 = y1.iter().zip(&y2).map(|(a, b)| (a - b) * (a - b)).sum();
        let d_in: f64 = targets1.iter().zip(&targets2).map(|(a, b)| (a - b) * (a - b)).sum();
        prop_assert!(d_out.sqrt() <= d_in.sqrt() + 1e-10);
    }

    #[test]
    fn sticky_solution_is_monotone_feasible_for_any_time(
        t in 0.0f64..3.0,
        seed in 0u64..500,
    ) {
        let grid = Grid::uniform(0.0, 1.0, 32).unwrap();
        let mu = DiscreteMeasure::uniform(&grid);
        let u0 = igr1d::studies::random_velocity(&grid, seed, 0, 1.0);
        let data = LinearData::raw(&grid, &u0).unwrap();
        let phi = sticky_solution(&data, t, &mu, &grid).unwrap();
        prop_assert_eq!(phi.values()[0], 0.0);
        prop_assert_eq!(*phi.values().last().unwrap(), 1.0);
        for w in phi.values().windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        prop_assert!(phi.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
