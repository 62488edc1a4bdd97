mod common;

use common::{median_instance, two_atom_quadratic};
use proptest::prelude::*;
use scolab::empirics::{estimate_stability, Parallelism};
use scolab::{Algorithm, Dataset, Datum, Point, Steps};

/// Exhaustive sup of the loss change over every dataset, position,
/// replacement and probe drawn from the atoms.
fn enumerated_gamma(values: &[f64], n: usize, lambda: f64) -> f64 {
    let loss = |z: f64, w: f64| 0.5 * lambda * (w - z) * (w - z);
    let mut best = 0.0f64;
    let total = values.len().pow(n as u32);
    for code in 0..total {
        let data: Vec<f64> = (0..n).map(|j| values[(code / values.len().pow(j as u32)) % values.len()]).collect();
        let w = data.iter().sum::<f64>() / n as f64;
        for &old in &data {
            for &rep in values {
                let w_swap = w + (rep - old) / n as f64;
                for &z in values {
                    best = best.max((loss(z, w) - loss(z, w_swap)).abs());
                }
            }
        }
    }
    best
}

#[test]
fn two_sample_estimate_matches_enumeration() {
    let inst = two_atom_quadratic(0.0, 2.0, 1.0, 10.0);
    let oracle = enumerated_gamma(&[0.0, 2.0], 2, 1.0);
    assert_eq!(oracle, 1.5);
    let est = estimate_stability(&inst, &Algorithm::erm(), 2, 200, 0, 5, Parallelism::Threads(1)).unwrap();
    assert!(est.exact_probe_sup);
    assert!((est.gamma_hat - oracle).abs() < 1e-12, "{}", est.gamma_hat);
    est.check().unwrap();
}

#[test]
fn estimate_never_exceeds_enumeration() {
    let inst = two_atom_quadratic(-1.0, 1.0, 1.0, 10.0);
    for n in [3usize, 5, 8] {
        let oracle = enumerated_gamma(&[-1.0, 1.0], n, 1.0);
        let est = estimate_stability(&inst, &Algorithm::erm(), n, 300, 0, n as u64, Parallelism::Threads(1)).unwrap();
        assert!(est.gamma_hat <= oracle + 1e-12);
        assert!(oracle <= est.theoretical_gamma);
    }
}

#[test]
fn swapping_one_observation_moves_the_erm_by_at_most_range_over_n() {
    let inst = two_atom_quadratic(-1.0, 1.0, 1.0, 10.0);
    let data = Dataset::new((0..10).map(|i| Datum::Point(Point::from([if i % 2 == 0 { -1.0 } else { 1.0 }]))).collect());
    let w = Algorithm::erm().fit(&inst, &data).unwrap().w_final;
    let swapped = data.with_replacement(0, Datum::Point(Point::from([1.0])));
    let w2 = Algorithm::erm().fit(&inst, &swapped).unwrap().w_final;
    assert!((w.distance(&w2) - 0.2).abs() < 1e-15);
}

#[test]
fn approximate_minimizers_respect_the_relaxed_ceiling() {
    let inst = median_instance();
    let (l, lam) = (inst.lipschitz(), inst.lambda());
    for delta_bar in [1e-2, 1e-3] {
        let steps = (4.0 * l * l / (lam * delta_bar)).ceil() as usize;
        let algo = Algorithm::PgdDecaying { steps: Steps::Fixed(steps) };
        let est = estimate_stability(&inst, &algo, 10, 20, 0, 3, Parallelism::Threads(1)).unwrap();
        est.check().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_erm_respects_four_l_squared_over_lambda_n(seed in any::<u64>(), n in 2usize..40, lambda in 0.1f64..3.0) {
        let inst = two_atom_quadratic(-0.7, 1.3, lambda, 2.0);
        let est = estimate_stability(&inst, &Algorithm::erm(), n, 20, 0, seed, Parallelism::Threads(1)).unwrap();
        let l = inst.lipschitz();
        prop_assert!(est.gamma_hat <= 4.0 * l * l / (lambda * n as f64) + 1e-9);
    }
}
