use std::collections::BTreeMap;
use std::f64::consts::E;

use nalgebra::{DMatrix, DVector};

use super::BenchmarkCase;
use crate::averages::{AverageFunction, LipschitzModel};
use crate::solver::Problem;

/// Coefficient `(e − 1)/2` of the quadratic component.
pub const QUAD_COEF: f64 = (E - 1.0) / 2.0;

/// `κ = e/2`.
pub fn kappa() -> f64 {
    E / 2.0
}

/// `κ₀ = (e − 1)/2`.
pub fn kappa0() -> f64 {
    (E - 1.0) / 2.0
}

/// `κ̄ = e^{1/(e−1)}/2`.
pub fn kappa_bar() -> f64 {
    (1.0 / (E - 1.0)).exp() / 2.0
}

/// `G(x, y, z) = (eˣ − 1, ((e−1)/2)y² + y, z)` on the closed unit ball,
/// root at the origin, `G'(x*) = I`.
pub fn make_motivational() -> BenchmarkCase {
    let problem = Problem::new("motivational", 3, |v: &DVector<f64>| {
        Ok(DVector::from_vec(vec![v[0].exp_m1(), QUAD_COEF * v[1] * v[1] + v[1], v[2]]))
    })
    .with_jacobian(|v: &DVector<f64>| {
        Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![
            v[0].exp(),
            (E - 1.0) * v[1] + 1.0,
            1.0,
        ])))
    })
    .with_root(DVector::zeros(3));

    let c = |k: f64| AverageFunction::constant(k).expect("positive constant");
    let model = LipschitzModel::new(c(kappa()), c(kappa0()))
        .and_then(|m| m.with_refined(c(kappa_bar())))
        .expect("κ₀ < κ̄ < κ");

    let expected = BTreeMap::from([
        ("delta0".to_string(), 0.245253),
        ("delta1".to_string(), 0.324947),
        ("delta2".to_string(), 0.382692),
    ]);
    BenchmarkCase {
        problem,
        model,
        expected,
        domain_radius: 1.0,
        default_x0: DVector::from_element(3, 0.3),
    }
}

/// The coordinate restrictions `s ↦ G_i(s·e_i)`: `eˢ − 1`, `((e−1)/2)s² + s`, `s`.
pub fn restriction(axis: usize, s: f64) -> f64 {
    match axis {
        0 => s.exp_m1(),
        1 => QUAD_COEF * s * s + s,
        _ => s,
    }
}
