//! Structural properties of the operators, checked on random inputs.

mod common;

use proptest::prelude::*;

use common::NODES;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, NODES)
}

fn ok(c: common::Check) -> Result<(), TestCaseError> {
    c.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maximal_is_sublinear(a in values(), b in values(), t in 0.0f64..1.0) {
        ok(common::maximal_sublinear(&a, &b, t))?;
    }

    #[test]
    fn maximal_is_homogeneous(a in values(), c in -4.0f64..4.0, t in 0.0f64..1.0) {
        ok(common::maximal_homogeneous(&a, c, t))?;
    }

    #[test]
    fn maximal_grows_with_the_radius(a in values(), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        ok(common::maximal_monotone(&a, t1, t2))?;
    }

    #[test]
    fn fast_path_matches_the_reference(a in values(), t in 0.0f64..1.0) {
        ok(common::fast_matches_reference(&a, t))?;
    }

    #[test]
    fn fast_path_matches_the_reference_in_the_plane(seed in any::<u64>(), t in 0.0f64..1.0) {
        ok(common::fast_matches_reference_plane(seed, t))?;
    }

    #[test]
    fn seminorm_triangle_and_homogeneity(
        a in values(), b in values(), c in -3.0f64..3.0, s in 0.1f64..0.9, p in 1.0f64..3.5,
    ) {
        ok(common::seminorm_triangle_homogeneity(&a, &b, c, s, p))?;
    }

    #[test]
    fn split_kernel_without_radius_ignores_eps(a in values(), s in 0.1f64..0.9, p in 1.0f64..3.5, eps in 0.05f64..0.95) {
        ok(common::split_ignores_eps(&a, s, p, eps))?;
    }

    #[test]
    fn reflected_weight_gives_the_same_seminorm(a in values(), y0 in -0.5f64..0.5) {
        ok(common::reflection_invariance(&a, y0))?;
    }
}

#[test]
fn truncation_decreases_energy() {
    common::truncation_decreases_energy().unwrap();
}

#[test]
fn capacity_is_subadditive_and_monotone() {
    common::capacity_subadditive_monotone().unwrap();
}

#[test]
fn constant_weights_have_ap_constant_one() {
    common::ap_constant_of_constants().unwrap();
}

#[test]
fn tail_classification_matches_eps_below_sp() {
    common::tail_classification().unwrap();
}

#[test]
fn weak_type_constant_is_stable_over_lambda() {
    common::weak_type_stable().unwrap();
}

#[test]
fn mollified_error_decreases_with_j() {
    common::mollifier_monotone().unwrap();
}
