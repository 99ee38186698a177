//! Closed-form radii for the special average kinds. Each is a regression
//! reference for the bisection solvers in the parent module.

/// Convergence radius for constant κ, κ₀: `1 / (2κ₀ + κ)`.
pub fn t31_constant(kappa: f64, kappa0: f64) -> f64 {
    1.0 / (2.0 * kappa0 + kappa)
}

/// Uniqueness radius for constant κ₀: `1 / κ₀`.
pub fn t41_constant(kappa0: f64) -> f64 {
    1.0 / kappa0
}

/// Weak-average radius for constant κ, κ₀: `1 / (2(κ + κ₀))`.
pub fn t51_constant(kappa: f64, kappa0: f64) -> f64 {
    0.5 / (kappa + kappa0)
}

/// Weak-average radius for `κ = Power(c, a)`, `κ₀ = Power(c0, a)`.
pub fn t51_power(c: f64, c0: f64, a: f64) -> f64 {
    0.5 * (c + c0).powf(-1.0 / a)
}

/// Strong-condition radius for `κ = Power(c, a)`, `κ₀ = Power(c0, a)`.
pub fn t51_strong_power(c: f64, c0: f64, a: f64) -> f64 {
    ((a + 1.0) / (2f64.powf(a) * (c0 * (a + 1.0) + c * a))).powf(1.0 / a)
}

/// Center-only radius for constant κ₀: `1 / (6κ₀)`.
pub fn t52_constant(kappa0: f64) -> f64 {
    1.0 / (6.0 * kappa0)
}

/// Center-only radius for `κ₀ = Power(c0, a)`.
pub fn t52_power(c0: f64, a: f64) -> f64 {
    (1.0 / (3.0 * c0 * 2f64.powf(a))).powf(1.0 / a)
}

/// Center-only radius for `κ₀ = Rational(gamma, c0)`.
pub fn t52_rational(gamma: f64, c0: f64) -> f64 {
    let s = 3.0 * c0 + 1.0;
    (s - (3.0 * c0 * s).sqrt()) / (2.0 * gamma * s)
}

/// Convergence radius for `κ(u) = γ + k·u`, `κ₀(u) = γ + k0·u` (shared γ):
/// the positive root of `((4/3)k + 2k0)δ² + 3γδ − 1 = 0`.
pub fn t31_affine(gamma: f64, k: f64, k0: f64) -> f64 {
    let disc = 9.0 * gamma * gamma + (16.0 / 3.0) * k + 8.0 * k0;
    let denom = (8.0 / 3.0) * k + 4.0 * k0;
    if denom == 0.0 {
        return 1.0 / (3.0 * gamma);
    }
    (-3.0 * gamma + disc.sqrt()) / denom
}

/// The uniqueness radius formula for `κ₀(u) = γ + k0·u` in an alternative
/// form. Returns `None` when the discriminant `4γ² − (16/3)k0` is negative.
/// It does not solve the uniqueness condition; see [`t41_affine_exact`].
pub fn t41_affine_alt(gamma: f64, k0: f64) -> Option<f64> {
    let disc = 4.0 * gamma * gamma - (16.0 / 3.0) * k0;
    (disc >= 0.0 && k0 > 0.0).then(|| (2.0 * gamma - disc.sqrt()) / ((8.0 / 3.0) * k0))
}

/// Uniqueness radius for `κ₀(u) = γ + k0·u`: the positive root of
/// `(2/3)k0·δ² + γδ − 1 = 0`.
pub fn t41_affine_exact(gamma: f64, k0: f64) -> f64 {
    if k0 == 0.0 {
        return 1.0 / gamma;
    }
    (-gamma + (gamma * gamma + (8.0 / 3.0) * k0).sqrt()) / ((4.0 / 3.0) * k0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn example_radii() {
        assert_relative_eq!(t31_constant(E / 2.0, E / 2.0), 2.0 / (3.0 * E), max_relative = 1e-15);
        assert_eq!(t41_constant(1.0), 1.0);
        assert_eq!(t52_constant(1.0), 1.0 / 6.0);
        assert_relative_eq!(t52_power(1.0, 1.0), 1.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(t52_rational(1.0, 1.0), (4.0 - 12f64.sqrt()) / 8.0, max_relative = 1e-14);
        assert_relative_eq!(t31_affine(0.0, 3.0, 1.5), 1.0 / 7f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn power_reductions_at_a_one() {
        assert_relative_eq!(t51_power(2.0, 1.0, 1.0), t51_constant(2.0, 1.0), max_relative = 1e-15);
        // a = 1: κ = c, κ₀ = c0, strong condition is the constant T3.1 radius
        assert_relative_eq!(t51_strong_power(2.0, 1.0, 1.0), t31_constant(2.0, 1.0), max_relative = 1e-15);
    }

    #[test]
    fn alt_uniqueness_formula_disagrees() {
        assert!(t41_affine_alt(0.0, 1.5).is_none());
        let (g, k0) = (2.0, 1.0);
        let alt = t41_affine_alt(g, k0).unwrap();
        let exact = t41_affine_exact(g, k0);
        let lhs = |d: f64| g * d + (2.0 / 3.0) * k0 * d * d;
        assert_relative_eq!(lhs(exact), 1.0, max_relative = 1e-14);
        assert!((lhs(alt) - 1.0).abs() > 1e-3);
    }
}
