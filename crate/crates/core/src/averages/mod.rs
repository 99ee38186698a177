//! κ-average functions and the integral transforms consumed by every radius
//! condition and error bound.
//!
//! An [`AverageFunction`] is a positive integrable `κ` on `(0, domain_hi)`.
//! The closed-form kinds carry exact antiderivatives; [`AverageFunction::Callback`]
//! falls back to adaptive quadrature.

mod model;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
pub use model::LipschitzModel;
pub use quadrature::{adaptive_quadrature, integrate, integrate_with_breaks, QuadOptions, QuadResult};

/// Default relative tolerance for quadrature-backed integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
/// Default number of grid points for monotonicity checks.
pub const DEFAULT_GRID_N: usize = 512;

/// Callback integrand for [`AverageFunction::Callback`]. Must be re-entrant.
pub type KappaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive integrable average function κ.
#[derive(Clone)]
pub enum AverageFunction {
    /// `κ(u) = k`.
    Constant { k: f64 },
    /// `κ(u) = gamma + slope·u`.
    Affine { gamma: f64, slope: f64 },
    /// `κ(u) = c·a·u^(a-1)`, `a ∈ (0, 1]`.
    Power { c: f64, a: f64 },
    /// `κ(u) = 2·gamma·c0 / (1 - gamma·u)^3` on `(0, 1/gamma)`.
    Rational { gamma: f64, c0: f64 },
    /// User-supplied κ on `(0, domain_hi)`.
    Callback { eval: KappaFn, domain_hi: f64 },
}

impl fmt::Debug for AverageFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { k } => f.debug_struct("Constant").field("k", k).finish(),
            Self::Affine { gamma, slope } => f
                .debug_struct("Affine")
                .field("gamma", gamma)
                .field("slope", slope)
                .finish(),
            Self::Power { c, a } => f.debug_struct("Power").field("c", c).field("a", a).finish(),
            Self::Rational { gamma, c0 } => f
                .debug_struct("Rational")
                .field("gamma", gamma)
                .field("c0", c0)
                .finish(),
            Self::Callback { domain_hi, .. } => f
                .debug_struct("Callback")
                .field("domain_hi", domain_hi)
                .finish_non_exhaustive(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Model(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Model(format!("{name} must be non-negative and finite, got {v}")))
    }
}

impl AverageFunction {
    pub fn constant(k: f64) -> Result<Self> {
        positive("k", k)?;
        Ok(Self::Constant { k })
    }

    pub fn affine(gamma: f64, slope: f64) -> Result<Self> {
        nonneg("gamma", gamma)?;
        nonneg("slope", slope)?;
        if gamma == 0.0 && slope == 0.0 {
            return Err(Error::Model("affine κ must not vanish identically".into()));
        }
        Ok(Self::Affine { gamma, slope })
    }

    pub fn power(c: f64, a: f64) -> Result<Self> {
        positive("c", c)?;
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::Model(format!("power exponent must lie in (0, 1], got {a}")));
        }
        Ok(Self::Power { c, a })
    }

    pub fn rational(gamma: f64, c0: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        positive("c0", c0)?;
        Ok(Self::Rational { gamma, c0 })
    }

    pub fn callback<F>(eval: F, domain_hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(domain_hi > 0.0) {
            return Err(Error::Model(format!("callback domain_hi must be positive, got {domain_hi}")));
        }
        Ok(Self::Callback {
            eval: Arc::new(eval),
            domain_hi,
        })
    }

    /// Supremum of the open domain `(0, domain_hi)`.
    pub fn domain_hi(&self) -> f64 {
        match self {
            Self::Rational { gamma, .. } => 1.0 / gamma,
            Self::Callback { domain_hi, .. } => *domain_hi,
            _ => f64::INFINITY,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Affine { .. } => "affine",
            Self::Power { .. } => "power",
            Self::Rational { .. } => "rational",
            Self::Callback { .. } => "callback",
        }
    }

    /// True when κ is known to be non-decreasing on its whole domain; callbacks
    /// are checked on a geometric grid up to `min(domain_hi, 1e3)`.
    pub fn is_nondecreasing(&self) -> bool {
        match self {
            Self::Constant { .. } | Self::Affine { .. } | Self::Rational { .. } => true,
            Self::Power { a, .. } => *a == 1.0,
            Self::Callback { domain_hi, .. } => {
                let hi = domain_hi.min(1e3) * (1.0 - 1e-9);
                self.is_nondecreasing_kappa_a(1.0, hi, DEFAULT_GRID_N)
            }
        }
    }

    fn raw(&self, u: f64) -> f64 {
        match self {
            Self::Constant { k } => *k,
            Self::Affine { gamma, slope } => gamma + slope * u,
            Self::Power { c, a } => c * a * u.powf(a - 1.0),
            Self::Rational { gamma, c0 } => 2.0 * gamma * c0 / (1.0 - gamma * u).powi(3),
            Self::Callback { eval, .. } => eval(u),
        }
    }

    /// κ(u) for `0 < u < domain_hi`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) || u >= self.domain_hi() {
            return Err(domain("kappa", u, format!("need 0 < u < {}", self.domain_hi())));
        }
        Ok(self.raw(u))
    }

    fn check_upper(&self, what: &'static str, s: f64) -> Result<()> {
        if !(s >= 0.0) || !s.is_finite() || s >= self.domain_hi() {
            return Err(domain(what, s, format!("need 0 <= s < {}", self.domain_hi())));
        }
        Ok(())
    }

    /// `∫_0^s κ(u) du`.
    pub fn integral_k(&self, s: f64, tol: f64) -> Result<f64> {
        self.check_upper("integral_K", s)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::Constant { k } => k * s,
            Self::Affine { gamma, slope } => gamma * s + 0.5 * slope * s * s,
            Self::Power { c, a } => c * s.powf(*a),
            Self::Rational { gamma, c0 } => {
                // c0/(1-γs)^2 - c0, written without cancellation
                let w = 1.0 - gamma * s;
                c0 * gamma * s * (2.0 - gamma * s) / (w * w)
            }
            Self::Callback { eval, .. } => adaptive_quadrature(|u| eval(u), 0.0, s, tol)?,
        })
    }

    /// `∫_0^s κ(u)·u du`.
    pub fn integral_m(&self, s: f64, tol: f64) -> Result<f64> {
        self.check_upper("integral_M", s)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::Constant { k } => 0.5 * k * s * s,
            Self::Affine { gamma, slope } => 0.5 * gamma * s * s + slope * s * s * s / 3.0,
            Self::Power { c, a } => c * a * s.powf(a + 1.0) / (a + 1.0),
            Self::Rational { gamma, c0 } => {
                let w = 1.0 - gamma * s;
                c0 * gamma * s * s / (w * w)
            }
            Self::Callback { eval, .. } => adaptive_quadrature(|u| eval(u) * u, 0.0, s, tol)?,
        })
    }

    /// `∫_lo^hi κ(u) du` for `0 <= lo <= hi < domain_hi`.
    pub fn integral_tail(&self, lo: f64, hi: f64, tol: f64) -> Result<f64> {
        if !(lo >= 0.0 && lo <= hi) {
            return Err(domain("integral_tail", lo, format!("need 0 <= lo <= hi = {hi}")));
        }
        self.check_upper("integral_tail", hi)?;
        if lo == hi {
            return Ok(0.0);
        }
        match self {
            Self::Callback { eval, .. } => adaptive_quadrature(|u| eval(u), lo, hi, tol),
            Self::Power { c, a } => Ok(c * (hi.powf(*a) - lo.powf(*a))),
            _ => Ok((self.integral_k(hi, tol)? - self.integral_k(lo, tol)?).max(0.0)),
        }
    }

    /// `∫_0^p u^beta κ(u) du`.
    pub fn moment(&self, beta: f64, p: f64, tol: f64) -> Result<f64> {
        if !(beta >= 0.0) {
            return Err(domain("moment", beta, "beta must be non-negative"));
        }
        if beta == 0.0 {
            return self.integral_k(p, tol);
        }
        if beta == 1.0 {
            return self.integral_m(p, tol);
        }
        self.check_upper("moment", p)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::Constant { k } => k * p.powf(beta + 1.0) / (beta + 1.0),
            Self::Affine { gamma, slope } => {
                gamma * p.powf(beta + 1.0) / (beta + 1.0) + slope * p.powf(beta + 2.0) / (beta + 2.0)
            }
            Self::Power { c, a } => c * a * p.powf(a + beta) / (a + beta),
            _ => {
                let f = |u: f64| u.powf(beta) * self.raw(u);
                adaptive_quadrature(f, 0.0, p, tol)?
            }
        })
    }

    /// Normalized moment `φ_{β,a}(P) = P^{-(a+β)} ∫_0^P u^β κ(u) du`.
    pub fn phi(&self, beta: f64, a: f64, p: f64, tol: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&a) {
            return Err(domain("phi", a, "a must lie in [0, 1]"));
        }
        if !(p > 0.0) {
            return Err(domain("phi", p, "P must be positive"));
        }
        Ok(self.moment(beta, p, tol)? / p.powf(a + beta))
    }

    /// `κ_a(P) = P^{1-a} κ(P)`.
    pub fn kappa_a(&self, a: f64, p: f64) -> Result<f64> {
        Ok(p.powf(1.0 - a) * self.eval(p)?)
    }

    /// Checks that `κ_a` is non-decreasing on a geometric grid of `grid_n`
    /// points spanning `[hi·1e-6, hi]`, allowing relative decreases up to 1e-12.
    pub fn is_nondecreasing_kappa_a(&self, a: f64, hi: f64, grid_n: usize) -> bool {
        let grid = geometric_grid(hi * 1e-6, hi, grid_n.max(2));
        let mut prev: Option<f64> = None;
        for p in grid {
            let Ok(v) = self.kappa_a(a, p) else {
                return false;
            };
            if let Some(pv) = prev {
                if v < pv - 1e-12 * pv.abs() {
                    return false;
                }
            }
            prev = Some(v);
        }
        true
    }
}

/// `n` points from `lo` to `hi` (inclusive) with a constant ratio.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo * (ratio * i as f64).exp() })
        .collect()
}

/// Serializable description of the closed-form kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AverageSpec {
    Constant { k: f64 },
    Affine { gamma: f64, slope: f64 },
    Power { c: f64, a: f64 },
    Rational { gamma: f64, c0: f64 },
}

impl TryFrom<AverageSpec> for AverageFunction {
    type Error = Error;

    fn try_from(spec: AverageSpec) -> Result<Self> {
        match spec {
            AverageSpec::Constant { k } => Self::constant(k),
            AverageSpec::Affine { gamma, slope } => Self::affine(gamma, slope),
            AverageSpec::Power { c, a } => Self::power(c, a),
            AverageSpec::Rational { gamma, c0 } => Self::rational(gamma, c0),
        }
    }
}

impl TryFrom<&AverageFunction> for AverageSpec {
    type Error = Error;

    fn try_from(f: &AverageFunction) -> Result<Self> {
        Ok(match *f {
            AverageFunction::Constant { k } => Self::Constant { k },
            AverageFunction::Affine { gamma, slope } => Self::Affine { gamma, slope },
            AverageFunction::Power { c, a } => Self::Power { c, a },
            AverageFunction::Rational { gamma, c0 } => Self::Rational { gamma, c0 },
            AverageFunction::Callback { .. } => {
                return Err(Error::Model("callback average functions are not serializable".into()))
            }
        })
    }
}

impl Serialize for AverageFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        AverageSpec::try_from(self)
            .map_err(serde::ser::Error::custom)?
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AverageFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = AverageSpec::deserialize(deserializer)?;
        AverageFunction::try_from(spec).map_err(serde::de::Error::custom)
    }
}
