mod common;

use common::all_losses;
use proptest::prelude::*;
use scolab::solvers::{erm_reference, optimization_error, optimization_error_against, pgd_constant, pgd_decaying};
use scolab::{Algorithm, Point, StepRule, Steps};

#[test]
fn decaying_step_error_is_within_its_bound() {
    for inst in all_losses() {
        let (l, lam) = (inst.lipschitz(), inst.lambda());
        for s in 0..20u64 {
            let data = inst.sample_dataset(30, 1000 + s).unwrap();
            let reference = erm_reference(&inst, &data, 1e-4).unwrap().w_final;
            for t in [10usize, 100, 1000] {
                let w = pgd_decaying(&inst, &data, t).unwrap().w_final;
                let err = optimization_error_against(&inst, &data, &w, &reference).unwrap();
                assert!(err <= 4.0 * l * l / (lam * t as f64) + 1e-9);
            }
        }
    }
}

#[test]
fn quadratic_erm_satisfies_first_order_optimality() {
    let inst = common::quadratic_3d();
    for s in 0..20 {
        let data = inst.sample_dataset(15, s).unwrap();
        let w = erm_reference(&inst, &data, 1e-6).unwrap().w_final;
        let g = inst.empirical_objective(&data).unwrap().subgradient(&w);
        let mut rng = scolab::rng::rng_from_seed(s);
        for _ in 0..200 {
            let v = inst.domain.sample_uniform(&mut rng);
            assert!(g.dot(&v.sub(&w)) >= -1e-12);
        }
    }
}

#[test]
fn approximate_erm_is_near_optimal() {
    for inst in all_losses() {
        let data = inst.sample_dataset(25, 8).unwrap();
        let tol = 1e-4;
        let w = erm_reference(&inst, &data, tol).unwrap().w_final;
        let rn = inst.empirical_risk(&data, &w).unwrap();
        let mut rng = scolab::rng::rng_from_seed(2);
        for _ in 0..500 {
            let v = inst.domain.sample_uniform(&mut rng);
            assert!(rn <= inst.empirical_risk(&data, &v).unwrap() + tol);
        }
    }
}

#[test]
fn log_n_rule_reaches_inverse_square_accuracy() {
    let inst = common::quadratic_3d();
    let n = 10_000;
    let algo = Algorithm::PgdConstant {
        steps: Steps::Rule(StepRule::LogN),
        c_opt: 1.0,
    };
    let data = inst.sample_dataset(n, 3).unwrap();
    let t = algo.resolve_steps(&inst, n).unwrap();
    let w = pgd_constant(&inst, &data, t, 1.0).unwrap().w_final;
    let err = optimization_error(&inst, &data, &w, 1e-9).unwrap();
    assert!(err <= 1.0 / (n as f64 * n as f64));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decaying_bound_holds_for_random_step_counts(seed in 0u64..1000, t in 1usize..300, k in 0usize..3) {
        let inst = &all_losses()[k];
        let data = inst.sample_dataset(12, seed).unwrap();
        let w = pgd_decaying(inst, &data, t).unwrap().w_final;
        let err = optimization_error(inst, &data, &w, 1e-3).unwrap();
        let (l, lam) = (inst.lipschitz(), inst.lambda());
        prop_assert!(err <= 4.0 * l * l / (lam * t as f64) + 1e-9);
    }

    #[test]
    fn constant_algorithm_ignores_data(seed in 0u64..1000) {
        let inst = common::median_instance();
        let w0 = Point::from([0.1, -0.2]);
        let algo = Algorithm::Constant { w0: w0.clone() };
        let data = inst.sample_dataset(5, seed).unwrap();
        prop_assert_eq!(algo.fit(&inst, &data).unwrap().w_final, w0);
    }
}
