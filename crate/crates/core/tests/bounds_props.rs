use proptest::prelude::*;
use scolab::bounds::*;

fn query(gamma: f64, m: f64, b: f64, n: f64, delta: f64, eta: f64) -> BoundQuery {
    BoundQuery {
        gamma,
        m,
        b,
        n,
        delta,
        eta,
        ..BoundQuery::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bounds_grow_with_gamma_and_shrink_with_delta(
        gamma in 0.0f64..10.0,
        dg in 0.0f64..1.0,
        m in 0.0f64..10.0,
        b in 0.0f64..10.0,
        n in 1.0f64..1e6,
        delta in 1e-6f64..0.99,
        eta in 0.01f64..10.0,
    ) {
        let q = query(gamma, m, b, n, delta, eta);
        let q_g = BoundQuery { gamma: gamma + dg, ..q };
        let q_d = BoundQuery { delta: (delta * 0.5).max(1e-9), ..q };
        for f in [gen_bound_rhs, thm1_rhs] {
            let base = f(&q).unwrap();
            prop_assert!(f(&q_g).unwrap() >= base);
            prop_assert!(f(&q_d).unwrap() >= base);
        }
        let base = thm2_rhs(&q, 0.1).unwrap();
        prop_assert!(thm2_rhs(&q_g, 0.1).unwrap() >= base);
        prop_assert!(thm2_rhs(&q_d, 0.1).unwrap() >= base);
        prop_assert!(thm2_rhs(&q, 0.2).unwrap() >= base);
    }

    #[test]
    fn rates_decrease_in_n(
        l in 0.1f64..10.0,
        lam in 0.01f64..10.0,
        n in 1.0f64..1e6,
        grow in 1.0f64..100.0,
        delta_bar in 0.0f64..1.0,
    ) {
        let n2 = n * grow;
        prop_assert!(erm_stability_gamma(l, lam, n2, delta_bar).unwrap() <= erm_stability_gamma(l, lam, n, delta_bar).unwrap());
        prop_assert!(smooth_pgd_gamma(l, lam, n2).unwrap() <= smooth_pgd_gamma(l, lam, n).unwrap());
        prop_assert!(pgd_opt_error_bound(l, lam, n2) <= pgd_opt_error_bound(l, lam, n));
        prop_assert!(erm_stability_gamma(l, lam, n, delta_bar).unwrap() >= 4.0 * l * l / (lam * n));
    }

    #[test]
    fn prop1_grows_with_delta_bar(
        l in 0.1f64..10.0,
        lam in 0.01f64..10.0,
        n in 1.0f64..1e6,
        delta in 1e-6f64..0.99,
        db in 0.0f64..1.0,
        extra in 0.0f64..1.0,
    ) {
        prop_assert!(prop1_rhs(l, lam, n, delta, db + extra, 1.0).unwrap() >= prop1_rhs(l, lam, n, delta, db, 1.0).unwrap());
    }

    #[test]
    fn tail_bound_is_a_probability_decreasing_in_t(
        a in 0.0f64..10.0,
        b in 0.01f64..10.0,
        e_f in 0.0f64..10.0,
        t in 0.0f64..10.0,
        dt in 0.0f64..1.0,
    ) {
        let p = selfbounding_tail_bound(a, b, e_f, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(selfbounding_tail_bound(a, b, e_f, t + dt).unwrap() <= p);
    }
}
