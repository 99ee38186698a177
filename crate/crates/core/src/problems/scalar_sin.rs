//! `G(x) = ∫₀ˣ (1 + 2t·sin(π/t)) dt` with `G(0) = 0`.
//!
//! The oscillatory part `A(x) = ∫₀ˣ t·sin(π/t) dt` is rewritten by repeated
//! integration by parts, using `t²·d/dt cos(π/t) = π·sin(π/t)` and
//! `t²·d/dt sin(π/t) = −π·cos(π/t)`, until the remainder integrand is
//! `t⁶·cos(π/t)`. Below `ε` that remainder is bounded by `ε⁷/7` and dropped.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::BenchmarkCase;
use crate::averages::quadrature::{integrate_with_breaks, QuadOptions};
use crate::averages::{AverageFunction, LipschitzModel};
use crate::error::Result;
use crate::solver::Problem;

const LEVELS: i32 = 5;
/// Remainder exponent: `t^{1+LEVELS}`.
const REM_POW: i32 = 1 + LEVELS;
/// Dropped tail of the remainder integral, relative to `|x|`.
const TRUNC_TOL: f64 = 1e-17;
/// Quadrature target relative to `|x|`; summed panel roundoff sits near 1e-16.
const QUAD_ABS_TOL: f64 = 1e-15;

fn remainder_integrand(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.powi(REM_POW) * (PI / t).cos()
    }
}

/// `A(x) = boundary + coef·∫₀ˣ t⁶cos(π/t) dt`.
fn expansion(x: f64) -> (f64, f64) {
    let (s, c) = (PI / x).sin_cos();
    let (mut n, mut is_sin, mut coef, mut acc) = (1, true, 1.0, 0.0);
    for _ in 0..LEVELS {
        let p = x.powi(n + 2) / PI;
        let m = f64::from(n + 2) / PI;
        if is_sin {
            acc += coef * p * c;
            coef *= -m;
        } else {
            acc -= coef * p * s;
            coef *= m;
        }
        n += 1;
        is_sin = !is_sin;
    }
    (acc, coef)
}

fn remainder_coef() -> f64 {
    expansion(1.0).1
}

fn quad_opts(scale: f64) -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-12,
        abs_tol: QUAD_ABS_TOL * scale,
        max_evals: 2_000_000,
    }
}

/// `R(x) = ∫₀ˣ t⁶cos(π/t) dt` for `x ≥ 0`, truncated below `ε`.
fn remainder(x: f64) -> Result<f64> {
    let coef = remainder_coef().abs();
    let eps = (f64::from(REM_POW + 1) * TRUNC_TOL * x / coef).powf(1.0 / f64::from(REM_POW + 1));
    if eps >= x {
        return Ok(0.0);
    }
    let mut breaks = vec![eps];
    while *breaks.last().unwrap() * 2.0 < x {
        breaks.push(breaks.last().unwrap() * 2.0);
    }
    breaks.push(x);
    Ok(integrate_with_breaks(remainder_integrand, &breaks, quad_opts(x))?.value)
}

fn assemble(x: f64, r: f64) -> f64 {
    let (boundary, coef) = expansion(x);
    x + 2.0 * (boundary + coef * r)
}

/// `G(x)`; odd in `x`.
pub fn residual(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let a = x.abs();
    Ok(x.signum() * assemble(a, remainder(a)?))
}

/// `G'(x) = 1 + 2x·sin(π/x)`, `G'(0) = 1`.
pub fn derivative(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        1.0 + 2.0 * x * (PI / x).sin()
    }
}

/// `G` on many points at once. The remainder integral is accumulated
/// outward from the origin, one short panel per grid gap.
pub fn residual_sweep(xs: &[f64]) -> Result<Vec<f64>> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].abs().total_cmp(&xs[j].abs()));
    let mut out = vec![0.0; xs.len()];
    let (mut prev, mut r) = (0.0f64, 0.0f64);
    for &i in &order {
        let a = xs[i].abs();
        if a == 0.0 {
            continue;
        }
        if prev == 0.0 {
            r = remainder(a)?;
        } else if a > prev {
            r += integrate_with_breaks(remainder_integrand, &[prev, a], quad_opts(a))?.value;
        }
        prev = a;
        out[i] = xs[i].signum() * assemble(a, r);
    }
    Ok(out)
}

/// The scalar problem; center average `κ₀ ≡ 1`, no radius average exists.
pub fn make_scalar_sin() -> BenchmarkCase {
    let problem = Problem::new("scalar-sin", 1, |v: &DVector<f64>| Ok(DVector::from_element(1, residual(v[0])?)))
        .with_jacobian(|v: &DVector<f64>| Ok(DMatrix::from_element(1, 1, derivative(v[0]))))
        .with_root(DVector::zeros(1));
    let model = LipschitzModel::center_only(AverageFunction::constant(1.0).expect("positive"));
    let expected = BTreeMap::from([
        ("delta_t52".to_string(), 1.0 / 6.0),
        ("delta_t41".to_string(), 1.0),
    ]);
    BenchmarkCase {
        problem,
        model,
        expected,
        domain_radius: 1.0,
        default_x0: DVector::from_element(1, 0.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct quadrature of the original integrand with a break at every
    /// zero of `sin(π/t)` down to `lo`; the dropped piece is at most `lo²/2`.
    fn brute(x: f64, lo: f64) -> f64 {
        let m_max = (1.0 / lo).floor() as usize;
        let mut breaks: Vec<f64> = (1..=m_max).rev().map(|m| 1.0 / m as f64).filter(|b| *b < x).collect();
        breaks.push(x);
        let f = |t: f64| t * (PI / t).sin();
        let a = integrate_with_breaks(f, &breaks, QuadOptions { rel_tol: 1e-13, abs_tol: 1e-15, max_evals: 10_000_000 })
            .unwrap()
            .value;
        x + 2.0 * a
    }

    #[test]
    fn matches_brute_force() {
        for x in [0.9, 0.5, 0.23, 0.1, 0.037] {
            let g = residual(x).unwrap();
            assert!((g - brute(x, 1e-4)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn odd_symmetry_and_derivative() {
        for x in [0.71, 0.3, 0.02] {
            assert_eq!(residual(-x).unwrap(), -residual(x).unwrap());
            let h = 1e-6 * x;
            let fd = (residual(x + h).unwrap() - residual(x - h).unwrap()) / (2.0 * h);
            assert!((fd - derivative(x)).abs() < 1e-6, "x={x} fd={fd}");
        }
    }

    #[test]
    fn sweep_agrees_with_pointwise() {
        let xs: Vec<f64> = (-50..=50).map(|i| i as f64 / 50.0 * 0.999).collect();
        let g = residual_sweep(&xs).unwrap();
        for (x, gs) in xs.iter().zip(&g) {
            assert!((gs - residual(*x).unwrap()).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn residual_magnitude_bound() {
        // |2A(x)| ≤ x², so |G(x) − x| ≤ x²
        for x in [0.99, 0.4, 0.01] {
            assert!((residual(x).unwrap() - x).abs() <= x * x);
        }
    }
}
