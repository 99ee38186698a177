use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::BenchmarkCase;
use crate::averages::{AverageFunction, LipschitzModel};
use crate::error::{Error, Result};
use crate::solver::Problem;

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`, nodes ascending.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root on [-1, 1]
        nodes[n - 1 - i] = (1.0 + x) / 2.0;
        nodes[i] = (1.0 - x) / 2.0;
        weights[n - 1 - i] = w / 2.0;
        weights[i] = w / 2.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nyström discretization of `h(s) = ∫₀¹ s t h(t)³ dt` on `n` Gauss–Legendre nodes:
/// `G_i(h) = h_i − τ_i Σ_j w_j τ_j h_j³`, root `h = 0`.
pub fn make_hammerstein(n: usize) -> Result<BenchmarkCase> {
    if n < 2 {
        return Err(Error::UnknownProblem(format!("hammerstein:{n} needs n >= 2")));
    }
    let (tau, w) = gauss_legendre_unit(n);
    let (t2, w2) = (tau.clone(), w.clone());
    let problem = Problem::new(format!("hammerstein:{n}"), n, move |h: &DVector<f64>| {
        let s: f64 = (0..n).map(|j| w[j] * tau[j] * h[j].powi(3)).sum();
        Ok(DVector::from_fn(n, |i, _| h[i] - tau[i] * s))
    })
    .with_jacobian(move |h: &DVector<f64>| {
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - 3.0 * t2[i] * w2[j] * t2[j] * h[j] * h[j]
        }))
    })
    .with_root(DVector::zeros(n));

    let k = AverageFunction::affine(0.0, 3.0)?;
    let model = LipschitzModel::new(k.clone(), AverageFunction::affine(0.0, 1.5)?)?.with_refined(k)?;
    let expected = BTreeMap::from([("delta_t31".to_string(), 1.0 / 7f64.sqrt())]);
    Ok(BenchmarkCase {
        problem,
        model,
        expected,
        domain_radius: 1.0,
        default_x0: DVector::from_element(n, 0.3),
    })
}
