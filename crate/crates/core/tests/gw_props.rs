mod common;

use common::{measure, params, reversed, scale};
use gwass::gw::{grid_refinement_bound, gw_brute_force, gw_distance, gw_line, gw_value, GwParams};
use gwass::measures::{DiscreteMeasure, DEFAULT_QUANTUM};
use proptest::prelude::*;

fn gw(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: &GwParams) -> f64 {
    gw_distance(mu, nu, p).unwrap().value
}

fn measures<const N: usize>(max_atoms: usize) -> impl Strategy<Value = [DiscreteMeasure; N]> {
    (1usize..=3).prop_flat_map(move |d| prop::array::uniform::<_, N>(measure(d, max_atoms)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn symmetry_and_identity([mu, nu] in measures::<2>(8), p in params()) {
        let (mn, nm) = (gw(&mu, &nu, &p), gw(&nu, &mu, &p));
        prop_assert!((mn - nm).abs() <= 1e-9 * scale(mn));
        let same = gw_distance(&mu, &mu, &p).unwrap();
        prop_assert!(same.value <= 1e-12);
        prop_assert!(same.removed_source_mass <= 1e-12 && same.removed_target_mass <= 1e-12);
        let distinct = mu.canonicalize(DEFAULT_QUANTUM).unwrap() != nu.canonicalize(DEFAULT_QUANTUM).unwrap();
        prop_assert_eq!(distinct, mn > 0.0);
    }

    #[test]
    fn triangle_inequality([mu, nu, eta] in measures::<3>(8), p in params()) {
        let (a, b, c) = (gw(&mu, &eta, &p), gw(&mu, &nu, &p), gw(&nu, &eta, &p));
        prop_assert!(a <= b + c + 1e-9 * scale(b + c), "{a} > {b} + {c}");
    }

    #[test]
    fn mass_bounds([mu, nu] in measures::<2>(8), p in params()) {
        let g = gw(&mu, &nu, &p);
        let (m, n) = (mu.total_mass(), nu.total_mass());
        prop_assert!(p.a * (m - n).abs() <= g + 1e-9 * scale(g));
        prop_assert!(g <= p.a * (m + n) + 1e-9 * scale(g));
    }

    #[test]
    fn scaling_bound([mu, nu] in measures::<2>(8), p in params(), k in 0.0..5.0f64) {
        let g = gw(&mu, &nu, &p);
        let scaled = gw(&mu.scale(k).unwrap(), &nu.scale(k).unwrap(), &p);
        let factor = k.powf(1.0 / p.p).max(k);
        prop_assert!(scaled <= factor * g + 1e-9 * scale(factor * g));
    }

    #[test]
    fn subadditivity([m1, n1, m2, n2] in measures::<4>(6), p in params()) {
        let whole = gw(&m1.add(&m2).unwrap(), &n1.add(&n2).unwrap(), &p);
        let parts = gw(&m1, &n1, &p) + gw(&m2, &n2, &p);
        prop_assert!(whole <= parts + 1e-9 * scale(parts));
    }

    #[test]
    fn witness_is_consistent([mu, nu] in measures::<2>(8), p in params()) {
        let r = gw_distance(&mu, &nu, &p).unwrap();
        prop_assert!((r.recompute_value(&p) - r.value).abs() <= 1e-9 * scale(r.value));
        for (kept, orig) in r.kept_source.atoms().iter().zip(mu.atoms()) {
            prop_assert!(kept.w <= orig.w * (1.0 + 1e-12) + 1e-15);
        }
        for (kept, orig) in r.kept_target.atoms().iter().zip(nu.atoms()) {
            prop_assert!(kept.w <= orig.w * (1.0 + 1e-12) + 1e-15);
        }
        let (ks, kt) = (r.kept_source.total_mass(), r.kept_target.total_mass());
        prop_assert!((ks - kt).abs() <= 1e-9 * scale(ks));
        prop_assert!((mu.total_mass() - ks - r.removed_source_mass).abs() <= 1e-9 * scale(ks));
    }

    #[test]
    fn truncation_radius_for_p1([mu, nu] in measures::<2>(8), p in params()) {
        let p = GwParams::new(p.a, p.b, 1.0).unwrap();
        let r = gw_distance(&mu, &nu, &p).unwrap();
        prop_assert!(r.max_arc_length() <= p.truncation_radius() + 1e-9);
    }

    #[test]
    fn translation_and_order_invariance([mu, nu] in measures::<2>(6), p in params(), s in -5.0..5.0f64) {
        let g = gw(&mu, &nu, &p);
        let shift = vec![s; mu.dim()];
        let moved = gw(&mu.translate(&shift).unwrap(), &nu.translate(&shift).unwrap(), &p);
        prop_assert!((g - moved).abs() <= 1e-9 * scale(g));
        let rev = gw(&reversed(&mu), &reversed(&nu), &p);
        prop_assert!((g - rev).abs() <= 1e-9 * scale(g));
    }

    #[test]
    fn line_solver_agrees_with_network_solver(mu in measure(1, 30), nu in measure(1, 30), a in 0.1..10.0f64, b in 0.1..10.0f64) {
        let p = GwParams::new(a, b, 1.0).unwrap();
        let line = gw_line(&mu, &nu, a, b).unwrap();
        let network = gw(&mu, &nu, &p);
        prop_assert!((line - network).abs() <= 1e-9 * scale(network), "line {line}, network {network}");
        prop_assert_eq!(gw_value(&mu, &nu, &p).unwrap(), line);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brute_force_brackets_the_solver(
        [mu, nu] in (1usize..=2).prop_flat_map(|d| prop::array::uniform::<_, 2>(measure(d, 2))),
        p in params(),
    ) {
        let exact = gw(&mu, &nu, &p);
        let oracle = gw_brute_force(&mu, &nu, &p, 20).unwrap();
        prop_assert!(exact <= oracle + 1e-9, "solver {exact} above oracle {oracle}");
        prop_assert!(oracle - exact <= grid_refinement_bound(&mu, &nu, &p, 20) + 1e-9);
    }
}
