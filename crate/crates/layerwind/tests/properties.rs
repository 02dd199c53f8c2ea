mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn comparison_principle_holds_for_every_scheme(inst in instance()) {
        let lo = comparison_min(&inst).map_err(TestCaseError::fail)?;
        prop_assert!(lo >= -1e-13, "min {lo} for {inst:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn constants_are_preserved(
        a0 in 0.5..2.0f64, a1 in 0.0..1.0f64, a2 in 0.0..1.0f64,
        k in 0u32..=24, value in -5.0..5.0f64,
    ) {
        let dev = constant_deviation([a0, a1, a2], 2f64.powi(-(k as i32)), value, 16);
        prop_assert!(dev <= 1e-12, "deviation {dev}");
    }

    #[test]
    fn classical_scheme_is_exact_on_travelling_affine_data(
        a in 0.25..4.0f64, c0 in -3.0..3.0f64, c1 in -3.0..3.0f64,
        n in 1usize..=4, m in 1usize..=4,
    ) {
        let ulps = affine_ulps(a, c0, c1, n, m);
        prop_assert!(ulps <= 4.0, "{ulps} ulp");
    }

    #[test]
    fn affine_roundoff_grows_at_most_linearly_in_steps(
        a in 0.25..4.0f64, c0 in -3.0..3.0f64, c1 in -3.0..3.0f64,
        n in 2usize..128, m in 2usize..128,
    ) {
        let ulps = affine_ulps(a, c0, c1, n, m);
        prop_assert!(ulps <= 4.0f64.max(0.5 * (n + m) as f64), "{ulps} ulp");
    }

    #[test]
    fn collapse_node_follows_closed_form(
        a in 0.5..2.0f64, b0 in 0.0..3.0f64, k in 0u32..=24,
        n in prop::sample::select(vec![8usize, 16, 64]), m in 1usize..64,
    ) {
        let err = collapse_error(a, b0, 2f64.powi(-(k as i32)), n, m);
        prop_assert!(err <= 1e-12, "error {err}");
    }
}

#[test]
fn fitted_factor_limits() {
    let (low, high) = fitted_limits();
    assert!((0.0..=1e-7).contains(&low), "{low}");
    assert_eq!(high, 800.0);
}

#[test]
fn rk4_is_fourth_order() {
    let order = rk4_order();
    assert!(order >= 3.8, "order {order}");
}

#[test]
fn tables_are_identical_across_thread_counts() {
    let one = table_csv(1, 2);
    assert_eq!(one, table_csv(2, 2));
    assert_eq!(one, table_csv(4, 2));
    assert_eq!(table_csv(1, 4), table_csv(3, 4));
}
