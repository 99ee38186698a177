use ntraub::averages::{AverageFunction, DEFAULT_QUAD_TOL};
use ntraub::radii::{self, condition_lhs, RadiusOptions, RadiusResult, Theorem};
use ntraub::LipschitzModel;
use proptest::prelude::*;

/// `(κ, κ₀)` affine pairs with `κ₀ ≤ κ`.
fn affine_model() -> impl Strategy<Value = LipschitzModel> {
    (0.05..5.0f64, 0.0..5.0f64, 0.05..=1.0f64, 0.0..=1.0f64).prop_map(|(g, s, rg, rs)| {
        let k = AverageFunction::affine(g, s).unwrap();
        let k0 = AverageFunction::affine(g * rg, s * rs).unwrap();
        LipschitzModel::new(k, k0).unwrap()
    })
}

fn feasible(theorem: Theorem, m: &LipschitzModel, r: &RadiusResult, search_hi: f64) -> Result<(), TestCaseError> {
    let lhs = |d| condition_lhs(theorem, m, d, DEFAULT_QUAD_TOL).unwrap();
    let below = lhs(r.delta * (1.0 - 1e-6));
    prop_assert!(matches!(below, Some(v) if v <= theorem.threshold()), "{below:?}");
    if !r.clamped {
        let above = lhs((r.delta * (1.0 + 1e-3)).min(search_hi));
        prop_assert!(above.is_none_or(|v| v >= theorem.threshold() - 1e-9), "{above:?}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn feasibility_at_returned_radius(m in affine_model()) {
        let o = RadiusOptions::bisection();
        let hi = 1e3;
        feasible(Theorem::T31, &m, &radii::radius_t31(&m, &o).unwrap(), hi)?;
        feasible(Theorem::T51, &m, &radii::radius_t51(&m, &o).unwrap(), hi)?;
        feasible(Theorem::T41, &m, &radii::radius_uniqueness_t41(m.center_avg(), &o).unwrap(), hi)?;
        feasible(Theorem::T52, &m, &radii::radius_t52(m.center_avg(), &o).unwrap(), hi)?;
    }

    #[test]
    fn larger_averages_give_smaller_radii(m in affine_model(), grow in 1.0..3.0f64) {
        let scale = |f: &AverageFunction| match f {
            AverageFunction::Affine { gamma, slope } => AverageFunction::affine(gamma * grow, slope * grow).unwrap(),
            _ => unreachable!(),
        };
        let big = LipschitzModel::new(scale(m.radius_avg().unwrap()), scale(m.center_avg())).unwrap();
        let o = RadiusOptions::default();
        for f in [radii::radius_t31, radii::radius_t51] {
            prop_assert!(f(&m, &o).unwrap().delta >= f(&big, &o).unwrap().delta - 1e-12);
        }
        prop_assert!(
            radii::radius_t52(m.center_avg(), &o).unwrap().delta
                >= radii::radius_t52(big.center_avg(), &o).unwrap().delta - 1e-12
        );
    }

    #[test]
    fn constant_bisection_matches_closed_form(k in 0.1..10.0f64, r in 0.05..=1.0f64) {
        let m = LipschitzModel::new(AverageFunction::constant(k).unwrap(), AverageFunction::constant(k * r).unwrap()).unwrap();
        let o = RadiusOptions::bisection();
        prop_assert!((radii::radius_t31(&m, &o).unwrap().delta - 1.0 / (2.0 * k * r + k)).abs() <= 1e-10);
        prop_assert!((radii::radius_uniqueness_t41(m.center_avg(), &o).unwrap().delta - 1.0 / (k * r)).abs() <= 1e-10);
    }

    #[test]
    fn center_only_radius_is_stricter(k0 in prop_oneof![
        (0.05..5.0f64, 0.0..5.0f64).prop_map(|(g, s)| AverageFunction::affine(g, s).unwrap()),
        (0.1..5.0f64, 0.05..5.0f64).prop_map(|(g, c)| AverageFunction::rational(g, c).unwrap()),
    ]) {
        let m = LipschitzModel::new(k0.clone(), k0.clone()).unwrap();
        let o = RadiusOptions::default();
        prop_assert!(radii::radius_t52(&k0, &o).unwrap().delta <= radii::radius_t51(&m, &o).unwrap().delta + 1e-12);
    }
}

#[test]
fn refinement_orders_example_radii() {
    let r = ntraub::reproduce::ex61().unwrap();
    let v = &r.values;
    assert!(v["delta0"] < v["delta1"] && v["delta1"] < v["delta2"]);
}

#[test]
fn decreasing_average_rejected_for_fifth_order_radius() {
    let p = AverageFunction::power(1.0, 0.5).unwrap();
    let m = LipschitzModel::new(p.clone(), p).unwrap();
    assert!(matches!(radii::radius_t31(&m, &RadiusOptions::default()), Err(ntraub::Error::Model(_))));
    // the weak-average radius needs no monotonicity
    assert!(radii::radius_t51(&m, &RadiusOptions::default()).is_ok());
}
