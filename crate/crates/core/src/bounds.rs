//! Contraction constants and a-priori error-bound sequences.
//!
//! Distances are `ρ(v) = ‖v − x*‖`. The seed distances `ρ(y₀)`, `ρ(z₀)` come
//! either from one actual step (benchmark mode) or from the worst-case
//! propagation `ρ(y₀) ≤ q₁ρ(x₀)`, `ρ(z₀) ≤ q₂q₁ρ(x₀)` (predictive mode).

use serde::{Deserialize, Serialize};

use crate::averages::{AverageFunction, LipschitzModel};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedDistances {
    pub rho_x0: f64,
    pub rho_y0: f64,
    pub rho_z0: f64,
}

impl SeedDistances {
    pub fn new(rho_x0: f64, rho_y0: f64, rho_z0: f64) -> Result<Self> {
        for (what, v) in [("rho_x0", rho_x0), ("rho_y0", rho_y0), ("rho_z0", rho_z0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(what, v, "distances must be finite and non-negative"));
            }
        }
        Ok(Self { rho_x0, rho_y0, rho_z0 })
    }
}

/// Which family of constants and bounds applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Non-decreasing κ, κ₀: per-step bounds with `M(κ)` and the C-constants.
    T31,
    /// Weak average: same per-step bounds, q-constants from `∫κ`.
    T51,
    /// Center-only: everything from κ₀.
    T52,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFlag {
    /// `ρ(y₀)` or `ρ(z₀)` is zero; E and F are reported as 0.
    ConvergedDegenerate,
    /// A constant that the theory requires below 1 is not.
    ConstantNotBelowOne,
    /// The E-factor is ≥ 1 so its sequence bounds nothing.
    VacuousE,
    /// The F-factor is ≥ 1.
    VacuousF,
    /// `q₁q₂q₃ ≥ 1`.
    VacuousLinear,
}

/// `∫₀^{2ρ}κ₀` checked to be below 1.
fn center_integral(kappa0: &AverageFunction, rho: f64, tol: f64) -> Result<f64> {
    let k0 = kappa0.integral_k(2.0 * rho, tol)?;
    if k0 >= 1.0 {
        return Err(Error::Model(format!(
            "center integral reaches {k0} >= 1 at 2*rho = {}",
            2.0 * rho
        )));
    }
    Ok(k0)
}

/// `M(κ, s)/s`, continuous at `s = 0` with value 0.
fn m_over_s(kappa: &AverageFunction, s: f64, tol: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(kappa.integral_m(s, tol)? / s)
}

/// C₁, C₂, C₃ for the fifth-order theory.
pub fn constants_c(model: &LipschitzModel, d: &SeedDistances, tol: f64) -> Result<[f64; 3]> {
    let kappa = model.radius_avg()?;
    let kappa0 = model.center_avg();
    let dx = 1.0 - center_integral(kappa0, d.rho_x0, tol)?;
    let dy = 1.0 - center_integral(kappa0, d.rho_y0, tol)?;
    Ok([
        m_over_s(kappa, 2.0 * d.rho_x0, tol)? / dx,
        m_over_s(kappa, d.rho_x0 + d.rho_y0, tol)? / dx,
        m_over_s(kappa, d.rho_y0 + d.rho_z0, tol)? / dy,
    ])
}

/// q₁, q₂, q₃ for the weak-average theory (numerators `∫κ`).
pub fn constants_q_t51(model: &LipschitzModel, d: &SeedDistances, tol: f64) -> Result<[f64; 3]> {
    let kappa = model.radius_avg()?;
    let kappa0 = model.center_avg();
    let dx = 1.0 - center_integral(kappa0, d.rho_x0, tol)?;
    let dy = 1.0 - center_integral(kappa0, d.rho_y0, tol)?;
    Ok([
        kappa.integral_k(2.0 * d.rho_x0, tol)? / dx,
        kappa.integral_k(d.rho_x0 + d.rho_y0, tol)? / dx,
        kappa.integral_k(d.rho_y0 + d.rho_z0, tol)? / dy,
    ])
}

/// q₁, q₂, q₃ for the center-only theory.
pub fn constants_q_t52(center: &AverageFunction, d: &SeedDistances, tol: f64) -> Result<[f64; 3]> {
    let kx = center_integral(center, d.rho_x0, tol)?;
    let ky = center_integral(center, d.rho_y0, tol)?;
    let kz = center.integral_k(2.0 * d.rho_z0, tol)?;
    Ok([2.0 * kx / (1.0 - kx), (kx + ky) / (1.0 - kx), (ky + kz) / (1.0 - ky)])
}

/// A factor of the form `A²B·ρ(x₀)²/(ρ(y₀)ρ(z₀))`; `None` when the ratio is
/// degenerate (`ρ(y₀)ρ(z₀) = 0`), which callers report as 0.
fn seed_factor(a: f64, b: f64, d: &SeedDistances) -> Option<f64> {
    let den = d.rho_y0 * d.rho_z0;
    (den > 0.0).then(|| a * a * b * d.rho_x0 * d.rho_x0 / den)
}

/// `E = C₁²C₂ρ(x₀)²/(ρ(y₀)ρ(z₀))`.
pub fn e_factor(c: &[f64; 3], d: &SeedDistances) -> Option<f64> {
    seed_factor(c[0], c[1], d)
}

/// The alternative `E = C₁C₂ρ(x₀)²/(ρ(y₀)ρ(z₀))`, kept for comparison.
pub fn e_factor_alt(c: &[f64; 3], d: &SeedDistances) -> Option<f64> {
    let den = d.rho_y0 * d.rho_z0;
    (den > 0.0).then(|| c[0] * c[1] * d.rho_x0 * d.rho_x0 / den)
}

/// `F = q₁²q₂ρ(x₀)²/(ρ(y₀)ρ(z₀))`.
pub fn f_factor(q: &[f64; 3], d: &SeedDistances) -> Option<f64> {
    seed_factor(q[0], q[1], d)
}

/// Coefficient K of `ρ(x_{t+1}) ≤ K·ρ(x_t)⁵`: `C₁²C₂C₃/(ρ(x₀)²ρ(y₀)ρ(z₀))`.
pub fn fifth_order_coefficient(c: &[f64; 3], d: &SeedDistances) -> Option<f64> {
    let den = d.rho_x0 * d.rho_x0 * d.rho_y0 * d.rho_z0;
    (den > 0.0).then(|| c[0] * c[0] * c[1] * c[2] / den)
}

/// Everything the `bounds` report needs for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    /// C₁..C₃; absent for the center-only variant.
    pub c: Option<[f64; 3]>,
    pub q: [f64; 3],
    #[serde(rename = "E")]
    pub e_factor: Option<f64>,
    pub e_factor_alt: Option<f64>,
    #[serde(rename = "F")]
    pub f_factor: Option<f64>,
    pub variant: Variant,
    pub flags: Vec<BoundFlag>,
    pub seeds: SeedDistances,
}

impl ConstantsReport {
    pub fn q_product(&self) -> f64 {
        self.q.iter().product()
    }

    pub fn has(&self, flag: BoundFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Constants for `variant` at the given seeds.
pub fn constants_report(
    model: &LipschitzModel,
    d: &SeedDistances,
    variant: Variant,
    tol: f64,
) -> Result<ConstantsReport> {
    let (c, q) = match variant {
        Variant::T31 | Variant::T51 => (Some(constants_c(model, d, tol)?), constants_q_t51(model, d, tol)?),
        Variant::T52 => (None, constants_q_t52(model.center_avg(), d, tol)?),
    };
    let degenerate = d.rho_y0 * d.rho_z0 == 0.0;
    let e = c.as_ref().map(|c| e_factor(c, d).unwrap_or(0.0));
    let e_alt = c.as_ref().map(|c| e_factor_alt(c, d).unwrap_or(0.0));
    let f = (variant == Variant::T52).then(|| f_factor(&q, d).unwrap_or(0.0));

    let mut flags = Vec::new();
    if degenerate {
        flags.push(BoundFlag::ConvergedDegenerate);
    }
    if c.iter().flatten().chain(q.iter()).any(|v| *v >= 1.0) {
        flags.push(BoundFlag::ConstantNotBelowOne);
    }
    if e.is_some_and(|e| e >= 1.0) {
        flags.push(BoundFlag::VacuousE);
    }
    if f.is_some_and(|f| f >= 1.0) {
        flags.push(BoundFlag::VacuousF);
    }
    if q.iter().product::<f64>() >= 1.0 {
        flags.push(BoundFlag::VacuousLinear);
    }
    Ok(ConstantsReport {
        c,
        q,
        e_factor: e,
        e_factor_alt: e_alt,
        f_factor: f,
        variant,
        flags,
        seeds: *d,
    })
}

/// A bound sequence for `t = 1..=t_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSequence {
    pub values: Vec<f64>,
    /// The factor is ≥ 1, so the sequence does not shrink.
    pub vacuous: bool,
}

/// `factor^{base^t − 1}·ρ(x₀)`; underflow lands on 0.
fn power_tower(factor: f64, base: f64, rho_x0: f64, t_max: usize) -> BoundSequence {
    let values = (1..=t_max)
        .map(|t| {
            let exponent = base.powi(t as i32) - 1.0;
            if exponent == 0.0 {
                rho_x0
            } else {
                factor.powf(exponent) * rho_x0
            }
        })
        .collect();
    BoundSequence {
        values,
        vacuous: factor >= 1.0,
    }
}

/// `E^{5^t − 1}·ρ(x₀)`.
pub fn error_seq_order5(e_factor: f64, rho_x0: f64, t_max: usize) -> BoundSequence {
    power_tower(e_factor, 5.0, rho_x0, t_max)
}

/// `(q₁q₂q₃)^t·ρ(x₀)`.
pub fn error_seq_linear(q_product: f64, rho_x0: f64, t_max: usize) -> BoundSequence {
    BoundSequence {
        values: (1..=t_max).map(|t| q_product.powi(t as i32) * rho_x0).collect(),
        vacuous: q_product >= 1.0,
    }
}

/// `factor^{(1+3a+a²)^t − 1}·ρ(x₀)`.
pub fn error_seq_weak(factor: f64, a: f64, rho_x0: f64, t_max: usize) -> Result<BoundSequence> {
    if !(0.0..=1.0).contains(&a) {
        return Err(domain("error_seq_weak", a, "a must lie in [0, 1]"));
    }
    Ok(power_tower(factor, 1.0 + 3.0 * a + a * a, rho_x0, t_max))
}

/// Sharp bound on the next sub-iterate's distance from the distances
/// `(ρ_a, ρ_b)` of the two points that produced it: `(ρ(x_t), ρ(x_t))` for
/// `y_t`, `(ρ(x_t), ρ(y_t))` for `z_t`, `(ρ(y_t), ρ(z_t))` for `x_{t+1}`.
///
/// T31/T51: `M(κ, ρ_a+ρ_b)·ρ_b / ((ρ_a+ρ_b)(1 − K(κ₀, 2ρ_a)))`.
/// T52: `(K(κ₀, 2ρ_a) + K(κ₀, 2ρ_b))·ρ_b / (1 − K(κ₀, 2ρ_a))`.
pub fn per_step_bound(model: &LipschitzModel, pair: (f64, f64), variant: Variant, tol: f64) -> Result<f64> {
    let (ra, rb) = pair;
    let kappa0 = model.center_avg();
    let den = 1.0 - center_integral(kappa0, ra, tol)?;
    match variant {
        Variant::T31 | Variant::T51 => Ok(m_over_s(model.radius_avg()?, ra + rb, tol)? * rb / den),
        Variant::T52 => {
            let num = kappa0.integral_k(2.0 * ra, tol)? + kappa0.integral_k(2.0 * rb, tol)?;
            Ok(num * rb / den)
        }
    }
}

/// Per-step bounds `[y_t, z_t, x_{t+1}]` given the observed distances.
pub fn step_bounds(
    model: &LipschitzModel,
    rho_x: f64,
    rho_y: f64,
    rho_z: f64,
    variant: Variant,
    tol: f64,
) -> Result<[f64; 3]> {
    Ok([
        per_step_bound(model, (rho_x, rho_x), variant, tol)?,
        per_step_bound(model, (rho_x, rho_y), variant, tol)?,
        per_step_bound(model, (rho_y, rho_z), variant, tol)?,
    ])
}

/// Worst-case seeds `ρ(y₀) = q₁ρ(x₀)`, `ρ(z₀) = q₂q₁ρ(x₀)`.
pub fn predictive_seeds(model: &LipschitzModel, rho_x0: f64, variant: Variant, tol: f64) -> Result<SeedDistances> {
    let q = |d: &SeedDistances| match variant {
        Variant::T52 => constants_q_t52(model.center_avg(), d, tol),
        _ => constants_q_t51(model, d, tol),
    };
    let q1 = q(&SeedDistances::new(rho_x0, 0.0, 0.0)?)?[0];
    let rho_y0 = q1 * rho_x0;
    let q2 = q(&SeedDistances::new(rho_x0, rho_y0, 0.0)?)?[1];
    SeedDistances::new(rho_x0, rho_y0, q2 * rho_y0)
}

/// Closed-form C-constants for constant κ, κ₀.
pub fn constants_c_constant(kappa: f64, kappa0: f64, d: &SeedDistances) -> [f64; 3] {
    let dx = 1.0 - 2.0 * kappa0 * d.rho_x0;
    let dy = 1.0 - 2.0 * kappa0 * d.rho_y0;
    [
        kappa * d.rho_x0 / dx,
        kappa * (d.rho_x0 + d.rho_y0) / (2.0 * dx),
        kappa * (d.rho_y0 + d.rho_z0) / (2.0 * dy),
    ]
}

/// Closed-form center-only q-constants for `κ₀ = Power(c0, a)`.
pub fn q_t52_power(c0: f64, a: f64, d: &SeedDistances) -> [f64; 3] {
    let s = 2f64.powf(a) * c0;
    let (px, py, pz) = (d.rho_x0.powf(a), d.rho_y0.powf(a), d.rho_z0.powf(a));
    [2.0 * s * px / (1.0 - s * px), s * (px + py) / (1.0 - s * px), s * (py + pz) / (1.0 - s * py)]
}

/// Closed-form center-only q-constants for `κ₀ = Rational(gamma, c0)`.
pub fn q_t52_rational(gamma: f64, c0: f64, d: &SeedDistances) -> [f64; 3] {
    let w = |r: f64| (1.0 - 2.0 * gamma * r).powi(2);
    let (wx, wy, wz) = (w(d.rho_x0), w(d.rho_y0), w(d.rho_z0));
    let den = |wa: f64| wa * (1.0 + c0) - c0;
    let g = |wa: f64| c0 - c0 * wa;
    [
        2.0 * g(wx) / den(wx),
        (g(wx) * wy + g(wy) * wx) / (den(wx) * wy),
        (g(wy) * wz + g(wz) * wy) / (den(wy) * wz),
    ]
}

/// An alternative q₁ for power κ, κ₀ of common exponent. It carries an extra
/// factor `a/(1+a)` relative to the integral form of q₁, which makes it the
/// `M(κ)`-based y-step quotient instead.
pub fn q1_power_alt(c: f64, c0: f64, a: f64, rho_x0: f64) -> f64 {
    let p = 2f64.powf(a) * rho_x0.powf(a);
    c * a * p / ((1.0 + a) * (1.0 - c0 * p))
}
