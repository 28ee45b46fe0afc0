mod common;

use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_explore::acquisition::*;

fn cases() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn information_is_non_negative(r2 in 0.0..50.0f64, p in 0.0..1.0f64) {
        let v = mutual_info_from_ratio(r2, p);
        prop_assert!(v >= 0.0);
        if p == 0.0 {
            prop_assert!(v.abs() <= 1e-12);
        }
    }

    #[test]
    fn information_vanishes_only_without_correlation(r2 in 0.0..20.0f64, p in 1e-3..1.0f64) {
        prop_assert!(mutual_info_from_ratio(r2, p) > 1e-12);
        prop_assert!(mutual_info_from_ratio(r2, 0.0) <= 1e-12);
    }

    #[test]
    fn decreasing_in_ratio(r2 in 0.0..30.0f64, dr in 0.0..5.0f64, p in 0.0..1.0f64) {
        let a = mutual_info_from_ratio(r2, p);
        let b = mutual_info_from_ratio(r2 + dr, p);
        prop_assert!(b <= a + 1e-15, "{a} -> {b}");
    }

    #[test]
    fn increasing_in_effective_correlation(r2 in 0.0..30.0f64, p in 0.0..1.0f64, dp in 0.0..1.0f64) {
        let q = (p + dp).min(1.0);
        let a = mutual_info_from_ratio(r2, p);
        let b = mutual_info_from_ratio(r2, q);
        prop_assert!(b + 1e-15 >= a, "{a} -> {b}");
    }

    #[test]
    fn rho_nu_grows_with_variance(v in 0.0..10.0f64, dv in 0.0..10.0f64, noise in 1e-3..5.0f64) {
        prop_assert!(rho_nu_sq(v + dv, noise) >= rho_nu_sq(v, noise));
        prop_assert!(rho_nu_sq(v, noise) < 1.0);
    }

    #[test]
    fn bounded_by_scaled_variance(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gp = common::random_gp(&mut rng, dim, 6);
        let x = common::random_point(&mut rng, dim);
        let z = common::random_point(&mut rng, dim);
        let v = mutual_info(&gp, &x, &z);
        let bound = mi_upper_bound(&gp, &x);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= bound + 1e-12, "{v} > {bound}");
        prop_assert!(v <= LN_2);
    }

    #[test]
    fn b_is_increasing(eta in 1e-4..20.0f64, d in 1e-6..5.0f64, m in 0.0..2.0f64, noise in 1e-2..2.0f64) {
        prop_assert!(b_function(eta + d, m, noise) >= b_function(eta, m, noise));
        prop_assert!(b_function(eta, m, noise) < LN_2);
    }

    #[test]
    fn b_inverse_round_trip(eta in 1e-3..10.0f64, m in 0.0..1.0f64, noise in 1e-2..1.0f64) {
        let t = b_function(eta, m, noise);
        let back = b_inverse(t, m, noise).unwrap();
        prop_assert!((b_function(back, m, noise) - t).abs() <= 1e-10 * t.max(1.0));
        prop_assert!((back - eta).abs() <= 1e-8 * eta.max(1.0), "{eta} -> {back}");
    }
}

#[test]
fn b_inverse_rejects_unreachable_targets() {
    assert!(b_inverse(LN_2, 0.5, 0.1).is_err());
    assert!(b_inverse(-0.1, 0.5, 0.1).is_err());
    assert!(b_inverse(0.0, 0.5, 0.1).unwrap() > 0.0);
}
