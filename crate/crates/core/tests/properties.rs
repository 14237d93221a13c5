use atl::dimension::{self, DirectOptions, FormulaOptions};
use atl::ergodic::{self, BernoulliMeasure};
use atl::semigroup::{self, CONE_MARGIN};
use atl::systems::{self, DominatedParams};
use atl::{Budget, Direction, IfSystem, Mat2, Vec2};
use proptest::prelude::*;

fn carpet_strategy() -> impl Strategy<Value = IfSystem> {
    (2usize..5, 2usize..6)
        .prop_flat_map(|(m, n)| (Just(m), Just(n), proptest::sample::subsequence((0..m * n).collect::<Vec<_>>(), 2..=m * n)))
        .prop_map(|(m, n, idx)| {
            let cells: Vec<(usize, usize)> = idx.iter().map(|&k| (k % m, k / m)).collect();
            systems::carpet(m, n, &cells, 1.0).unwrap()
        })
}

fn positive_matrix() -> impl Strategy<Value = Mat2> {
    (0.05f64..0.4, 0.05f64..0.4, 0.05f64..0.4, 0.05f64..0.4).prop_map(|(a, b, c, d)| Mat2::new(a, b, c, d))
}

fn small_direct(samples: usize) -> DirectOptions {
    DirectOptions { samples, radius_fractions: vec![0.25, 2f64.powi(-9)], ratio_exponents: (4, 8), min_window: 5, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hull_count_bounds_point_count(sys in carpet_strategy(), k in 3i32..8) {
        let c = dimension::box_count(&sys, 0.5f64.powi(k), &Budget::default()).unwrap();
        prop_assert!(c.hull >= c.point && c.point > 0);
    }

    #[test]
    fn direct_estimate_grows_with_samples(n in 1usize..4, extra in 1usize..3) {
        let sys = systems::carpet23();
        let a = dimension::assouad_direct(&sys, &small_direct(n)).unwrap();
        let b = dimension::assouad_direct(&sys, &small_direct(n + extra)).unwrap();
        prop_assert!(a.value <= b.value + 1e-12, "{} > {}", a.value, b.value);
    }

    #[test]
    fn formula_estimate_grows_with_bases(n in 1usize..4, extra in 1usize..3) {
        let sys = systems::diag2();
        let xf = semigroup::estimate_xf(&sys, 10, 8);
        let opts = |base_samples| FormulaOptions { base_samples, directions: 2, depth: 8, ..Default::default() };
        let a = dimension::assouad_formula(&sys, &xf, &opts(n)).unwrap();
        let b = dimension::assouad_formula(&sys, &xf, &opts(n + extra)).unwrap();
        prop_assert!(a.value <= b.value + 1e-12, "{} > {}", a.value, b.value);
    }

    #[test]
    fn furstenberg_sampling_ignores_thread_count(seed in any::<u64>()) {
        let sys = systems::dominated3();
        let nu = BernoulliMeasure::uniform(3);
        let draw = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
                .install(|| ergodic::furstenberg_sample(&sys, &nu, 32, 64, seed).unwrap().directions)
        };
        prop_assert_eq!(draw(1), draw(3));
    }

    #[test]
    fn positive_tuples_have_invariant_multicones(mats in proptest::collection::vec(positive_matrix(), 1..4)) {
        let rep = semigroup::is_dominated_matrices(&mats, 6).unwrap();
        let cone = rep.multicone.expect("positive matrices preserve the first quadrant");
        prop_assert!(cone.is_strongly_invariant(&mats, CONE_MARGIN));
    }

    #[test]
    fn parameter_validation_matches_conditions(
        lambda in 0.3f64..1.1, gamma in 0.0f64..0.6, a in -0.1f64..0.5, b in -0.1f64..0.5,
        d in -0.1f64..0.5, x in 0.0f64..1.0, y in 0.0f64..1.0,
    ) {
        let p = DominatedParams { lambda, gamma, a, b, d, v3: [x, y] };
        for c in p.conditions() {
            prop_assert_eq!(c.holds, c.slack > 0.0);
        }
        prop_assert_eq!(p.system().is_ok(), p.violations().is_empty());
    }

    #[test]
    fn lyapunov_exponents_are_ordered(s in 0.1f64..0.9, t in 0.1f64..0.9, u in 0.1f64..0.9) {
        let sys = IfSystem::from_matrices(
            "pair",
            &[(Mat2::new(s, 0.1, 0.0, t), Vec2::ZERO), (Mat2::new(u, 0.0, 0.2, 0.3), Vec2::new(0.5, 0.5))],
        ).unwrap();
        let est = ergodic::lyapunov(&sys, &BernoulliMeasure::uniform(2), 200, 20, 1).unwrap();
        prop_assert!(est.chi1 <= est.chi2 + 1e-12);
        prop_assert!(est.chi1 > 0.0);
    }

    #[test]
    fn projective_distance_is_a_metric(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
        let (p, q, r) = (Direction::new(a), Direction::new(b), Direction::new(c));
        prop_assert!((p.dist(&q) - q.dist(&p)).abs() < 1e-15);
        prop_assert!(p.dist(&q) <= std::f64::consts::FRAC_PI_2 + 1e-15);
        prop_assert!(p.dist(&r) <= p.dist(&q) + q.dist(&r) + 1e-12);
    }

    #[test]
    fn systems_survive_json(sys in carpet_strategy()) {
        prop_assert_eq!(IfSystem::from_json(&sys.to_json()).unwrap(), sys);
    }
}
