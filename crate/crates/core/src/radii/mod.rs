//! Convergence and uniqueness radii.
//!
//! Every condition has a left-hand side that is non-decreasing in δ, so the
//! feasible set is an interval `(0, δ*]` and bisection finds δ* without any
//! smoothness assumption on κ. Closed forms are used for the kinds that admit
//! them when [`RadiusMode::Auto`] is selected.

pub mod closed_form;

use serde::{Deserialize, Serialize};

use crate::averages::{geometric_grid, AverageFunction, LipschitzModel, DEFAULT_GRID_N, DEFAULT_QUAD_TOL};
use crate::error::{Error, Result};

/// Absolute bisection tolerance on δ.
pub const BISECTION_TOL: f64 = 1e-12;
/// Upper bound on the default search interval.
pub const MAX_SEARCH_HI: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// Non-decreasing κ and κ₀; fifth-order convergence.
    T31,
    /// Uniqueness ball from κ₀.
    T41,
    /// Weak average condition `∫(κ + κ₀) ≤ 1`.
    T51,
    /// Strong condition under the κ_a hypothesis.
    T51Strong,
    /// Center-only condition `∫κ₀ ≤ 1/3`.
    T52,
}

impl Theorem {
    pub fn threshold(self) -> f64 {
        match self {
            Theorem::T52 => 1.0 / 3.0,
            _ => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Theorem::T31 => "T31",
            Theorem::T41 => "T41",
            Theorem::T51 => "T51",
            Theorem::T51Strong => "T51Strong",
            Theorem::T52 => "T52",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusMode {
    /// Closed form when the kinds admit one, bisection otherwise.
    #[default]
    Auto,
    /// Always bisect.
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusOptions {
    /// Upper end of the search; `None` uses `min(domain_hi / 2, 1e3)`.
    pub search_hi: Option<f64>,
    /// Relative tolerance for quadrature-backed integrals.
    pub quad_tol: f64,
    pub mode: RadiusMode,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        Self {
            search_hi: None,
            quad_tol: DEFAULT_QUAD_TOL,
            mode: RadiusMode::Auto,
        }
    }
}

impl RadiusOptions {
    pub fn bisection() -> Self {
        Self {
            mode: RadiusMode::Bisection,
            ..Self::default()
        }
    }

    pub fn with_search_hi(mut self, hi: f64) -> Self {
        self.search_hi = Some(hi);
        self
    }

    fn resolve_hi(&self, domain_hi: f64) -> Result<f64> {
        let cap = (0.5 * domain_hi).min(MAX_SEARCH_HI);
        match self.search_hi {
            None => Ok(cap),
            Some(h) if h > 0.0 && h.is_finite() => Ok(h.min(cap)),
            Some(h) => Err(crate::error::domain("search_hi", h, "must be positive and finite")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    pub delta: f64,
    #[serde(rename = "lhs")]
    pub condition_lhs_at_delta: f64,
    pub theorem: Theorem,
    pub method: Method,
    /// The condition still held at the end of the search interval.
    #[serde(default)]
    pub clamped: bool,
}

/// Left-hand side of a radius condition as a function of δ. `Ok(None)` marks
/// δ as infeasible outright (outside a domain, or `∫κ₀ ≥ 1` for T31).
trait Condition {
    fn theorem(&self) -> Theorem;
    fn lhs(&self, delta: f64) -> Result<Option<f64>>;
}

struct T31<'a> {
    kappa: &'a AverageFunction,
    kappa0: &'a AverageFunction,
    tol: f64,
}

struct T41<'a> {
    kappa0: &'a AverageFunction,
    tol: f64,
}

struct T51<'a> {
    kappa: &'a AverageFunction,
    kappa0: &'a AverageFunction,
    tol: f64,
}

struct T51Strong<'a> {
    kappa: &'a AverageFunction,
    kappa0: &'a AverageFunction,
    tol: f64,
}

struct T52<'a> {
    kappa0: &'a AverageFunction,
    tol: f64,
}

/// Maps domain errors to infeasibility; other errors propagate.
fn within<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

impl Condition for T31<'_> {
    fn theorem(&self) -> Theorem {
        Theorem::T31
    }
    fn lhs(&self, d: f64) -> Result<Option<f64>> {
        let s = 2.0 * d;
        let Some(k0) = within(self.kappa0.integral_k(s, self.tol))? else {
            return Ok(None);
        };
        if k0 >= 1.0 {
            return Ok(None);
        }
        let Some(m) = within(self.kappa.integral_m(s, self.tol))? else {
            return Ok(None);
        };
        Ok(Some(m / (s * (1.0 - k0))))
    }
}

impl Condition for T41<'_> {
    fn theorem(&self) -> Theorem {
        Theorem::T41
    }
    fn lhs(&self, d: f64) -> Result<Option<f64>> {
        let s = 2.0 * d;
        let (Some(k0), Some(m0)) = (
            within(self.kappa0.integral_k(s, self.tol))?,
            within(self.kappa0.integral_m(s, self.tol))?,
        ) else {
            return Ok(None);
        };
        Ok(Some((s * k0 - m0) / s))
    }
}

impl Condition for T51<'_> {
    fn theorem(&self) -> Theorem {
        Theorem::T51
    }
    fn lhs(&self, d: f64) -> Result<Option<f64>> {
        let s = 2.0 * d;
        let (Some(k), Some(k0)) = (
            within(self.kappa.integral_k(s, self.tol))?,
            within(self.kappa0.integral_k(s, self.tol))?,
        ) else {
            return Ok(None);
        };
        Ok(Some(k + k0))
    }
}

impl Condition for T51Strong<'_> {
    fn theorem(&self) -> Theorem {
        Theorem::T51Strong
    }
    fn lhs(&self, d: f64) -> Result<Option<f64>> {
        let s = 2.0 * d;
        let (Some(k0), Some(m)) = (
            within(self.kappa0.integral_k(s, self.tol))?,
            within(self.kappa.integral_m(s, self.tol))?,
        ) else {
            return Ok(None);
        };
        Ok(Some(k0 + m / s))
    }
}

impl Condition for T52<'_> {
    fn theorem(&self) -> Theorem {
        Theorem::T52
    }
    fn lhs(&self, d: f64) -> Result<Option<f64>> {
        within(self.kappa0.integral_k(2.0 * d, self.tol))
    }
}

fn feasible(c: &dyn Condition, d: f64) -> Result<Option<f64>> {
    Ok(c.lhs(d)?.filter(|v| *v <= c.theorem().threshold()))
}

/// Largest δ in `(0, hi]` satisfying the condition.
fn bisect(c: &dyn Condition, hi: f64) -> Result<RadiusResult> {
    let theorem = c.theorem();
    if let Some(lhs) = feasible(c, hi)? {
        return Ok(RadiusResult {
            delta: hi,
            condition_lhs_at_delta: lhs,
            theorem,
            method: Method::Bisection,
            clamped: true,
        });
    }
    let (mut lo, mut up) = (0.0_f64, hi);
    let mut lo_lhs = 0.0;
    while up - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + up);
        if mid <= lo || mid >= up {
            break;
        }
        match feasible(c, mid)? {
            Some(v) => {
                lo = mid;
                lo_lhs = v;
            }
            None => up = mid,
        }
    }
    if lo <= 0.0 {
        return Err(Error::NoRadius {
            condition: theorem.label(),
            search_hi: hi,
        });
    }
    Ok(RadiusResult {
        delta: lo,
        condition_lhs_at_delta: lo_lhs,
        theorem,
        method: Method::Bisection,
        clamped: false,
    })
}

/// Accepts a closed-form δ if it lies inside the search interval and passes
/// the condition (up to rounding); otherwise falls back to bisection.
fn closed_or_bisect(c: &dyn Condition, closed: Option<f64>, hi: f64) -> Result<RadiusResult> {
    if let Some(d) = closed.filter(|d| *d > 0.0 && *d <= hi) {
        if let Some(lhs) = c.lhs(d)? {
            if lhs <= c.theorem().threshold() * (1.0 + 1e-12) {
                return Ok(RadiusResult {
                    delta: d,
                    condition_lhs_at_delta: lhs,
                    theorem: c.theorem(),
                    method: Method::ClosedForm,
                    clamped: false,
                });
            }
        }
    }
    bisect(c, hi)
}

fn auto(opts: &RadiusOptions, closed: impl FnOnce() -> Option<f64>) -> Option<f64> {
    match opts.mode {
        RadiusMode::Auto => closed(),
        RadiusMode::Bisection => None,
    }
}

/// Convergence radius under non-decreasing κ and κ₀:
/// `∫₀^{2δ}κ(u)u du ≤ 2δ(1 − ∫₀^{2δ}κ₀)`.
pub fn radius_t31(model: &LipschitzModel, opts: &RadiusOptions) -> Result<RadiusResult> {
    if !model.radius_nondecreasing() || !model.center_nondecreasing() {
        return Err(Error::Model("the fifth-order radius requires non-decreasing kappa and kappa0".into()));
    }
    let kappa = model.radius_avg()?;
    let kappa0 = model.center_avg();
    let hi = opts.resolve_hi(model.domain_hi())?;
    let cond = T31 {
        kappa,
        kappa0,
        tol: opts.quad_tol,
    };
    let closed = auto(opts, || match (kappa, kappa0) {
        (AverageFunction::Constant { k }, AverageFunction::Constant { k: k0 }) => Some(closed_form::t31_constant(*k, *k0)),
        _ => None,
    });
    closed_or_bisect(&cond, closed, hi)
}

/// Uniqueness radius: `∫₀^{2δ}κ₀(u)(2δ − u)du ≤ 2δ`.
pub fn radius_uniqueness_t41(center: &AverageFunction, opts: &RadiusOptions) -> Result<RadiusResult> {
    let hi = opts.resolve_hi(center.domain_hi())?;
    let cond = T41 {
        kappa0: center,
        tol: opts.quad_tol,
    };
    let closed = auto(opts, || match center {
        AverageFunction::Constant { k } => Some(closed_form::t41_constant(*k)),
        _ => None,
    });
    closed_or_bisect(&cond, closed, hi)
}

/// Weak-average radius: `∫₀^{2δ}(κ + κ₀) ≤ 1`. No monotonicity required.
pub fn radius_t51(model: &LipschitzModel, opts: &RadiusOptions) -> Result<RadiusResult> {
    let kappa = model.radius_avg()?;
    let kappa0 = model.center_avg();
    let hi = opts.resolve_hi(model.domain_hi())?;
    let cond = T51 {
        kappa,
        kappa0,
        tol: opts.quad_tol,
    };
    let closed = auto(opts, || match (kappa, kappa0) {
        (AverageFunction::Constant { k }, AverageFunction::Constant { k: k0 }) => Some(closed_form::t51_constant(*k, *k0)),
        (AverageFunction::Power { c, a }, AverageFunction::Power { c: c0, a: a0 }) if a == a0 => {
            Some(closed_form::t51_power(*c, *c0, *a))
        }
        _ => None,
    });
    closed_or_bisect(&cond, closed, hi)
}

/// Strong radius under the κ_a hypothesis:
/// `∫₀^{2δ}κ₀ + (1/2δ)∫₀^{2δ}κ(u)u du ≤ 1`.
pub fn radius_t51_strong(model: &LipschitzModel, a: f64, opts: &RadiusOptions) -> Result<RadiusResult> {
    let kappa = model.radius_avg()?;
    let kappa0 = model.center_avg();
    let hi = opts.resolve_hi(model.domain_hi())?;
    if !(0.0..=1.0).contains(&a) {
        return Err(crate::error::domain("kappa_a exponent", a, "must lie in [0, 1]"));
    }
    let check_hi = (2.0 * hi).min(kappa.domain_hi() * (1.0 - 1e-9));
    if !kappa.is_nondecreasing_kappa_a(a, check_hi, DEFAULT_GRID_N) {
        return Err(Error::Model(format!("kappa_a is not non-decreasing for a = {a}")));
    }
    let cond = T51Strong {
        kappa,
        kappa0,
        tol: opts.quad_tol,
    };
    let closed = auto(opts, || match (kappa, kappa0) {
        (AverageFunction::Constant { k }, AverageFunction::Constant { k: k0 }) => Some(closed_form::t31_constant(*k, *k0)),
        (AverageFunction::Power { c, a }, AverageFunction::Power { c: c0, a: a0 }) if a == a0 => {
            Some(closed_form::t51_strong_power(*c, *c0, *a))
        }
        _ => None,
    });
    closed_or_bisect(&cond, closed, hi)
}

/// Center-only radius: `∫₀^{2δ}κ₀ ≤ 1/3`.
pub fn radius_t52(center: &AverageFunction, opts: &RadiusOptions) -> Result<RadiusResult> {
    let hi = opts.resolve_hi(center.domain_hi())?;
    let cond = T52 {
        kappa0: center,
        tol: opts.quad_tol,
    };
    let closed = auto(opts, || match center {
        AverageFunction::Constant { k } => Some(closed_form::t52_constant(*k)),
        AverageFunction::Power { c, a } => Some(closed_form::t52_power(*c, *a)),
        AverageFunction::Rational { gamma, c0 } => Some(closed_form::t52_rational(*gamma, *c0)),
        _ => None,
    });
    closed_or_bisect(&cond, closed, hi)
}

/// The larger of the weak and strong radii. The strong one is only
/// considered when the κ_a hypothesis holds for `a`.
pub fn radius_t51_operative(model: &LipschitzModel, a: f64, opts: &RadiusOptions) -> Result<RadiusResult> {
    let weak = radius_t51(model, opts)?;
    match radius_t51_strong(model, a, opts) {
        Ok(strong) if strong.delta > weak.delta => Ok(strong),
        Ok(_) | Err(Error::Model(_)) => Ok(weak),
        Err(e) => Err(e),
    }
}

/// Evaluates a condition's left-hand side at δ (`None` when infeasible
/// outright). Exposed for feasibility checks.
pub fn condition_lhs(theorem: Theorem, model: &LipschitzModel, delta: f64, tol: f64) -> Result<Option<f64>> {
    let kappa0 = model.center_avg();
    match theorem {
        Theorem::T31 => T31 {
            kappa: model.radius_avg()?,
            kappa0,
            tol,
        }
        .lhs(delta),
        Theorem::T41 => T41 { kappa0, tol }.lhs(delta),
        Theorem::T51 => T51 {
            kappa: model.radius_avg()?,
            kappa0,
            tol,
        }
        .lhs(delta),
        Theorem::T51Strong => T51Strong {
            kappa: model.radius_avg()?,
            kappa0,
            tol,
        }
        .lhs(delta),
        Theorem::T52 => T52 { kappa0, tol }.lhs(delta),
    }
}

const DELTA_BAR_GRID: usize = 2048;

/// Minimal positive zero of `2κ₀(u)u − 1`.
pub fn delta_bar(center: &AverageFunction, search_hi: Option<f64>) -> Result<f64> {
    let cap = center.domain_hi().min(MAX_SEARCH_HI);
    let hi = search_hi.map_or(cap, |h| h.min(cap));
    if let AverageFunction::Constant { k } = center {
        let d = 0.5 / k;
        return if d <= hi {
            Ok(d)
        } else {
            Err(Error::NotFound {
                what: "2 kappa0(u) u - 1",
                search_hi: hi,
            })
        };
    }
    let h = |u: f64| -> Option<f64> { center.eval(u).ok().map(|k| 2.0 * k * u - 1.0) };
    let top = if hi < center.domain_hi() { hi } else { hi * (1.0 - 1e-12) };
    let mut prev = None;
    for u in geometric_grid(top * 1e-12, top, DELTA_BAR_GRID) {
        let Some(v) = h(u) else { continue };
        if v >= 0.0 {
            let Some(mut lo) = prev else {
                // already non-negative at the first sample: root below grid start
                return Ok(u);
            };
            let mut up = u;
            while up - lo > 1e-15 * up {
                let mid = 0.5 * (lo + up);
                if mid <= lo || mid >= up {
                    break;
                }
                match h(mid) {
                    Some(w) if w < 0.0 => lo = mid,
                    _ => up = mid,
                }
            }
            return Ok(up);
        }
        prev = Some(u);
    }
    Err(Error::NotFound {
        what: "2 kappa0(u) u - 1",
        search_hi: hi,
    })
}

/// A model whose radius average is the refined κ̄, valid on
/// `B(x*, min(δ, δ̄))`.
#[derive(Debug, Clone)]
pub struct RefinedModel {
    pub model: LipschitzModel,
    pub delta_bar: f64,
}

/// Swaps κ for κ̄ after re-checking `κ̄ ≤ κ` on `(0, min(δ, δ̄)]`, where δ is
/// the convergence radius of the unrefined model.
pub fn refined_model(model: &LipschitzModel, opts: &RadiusOptions) -> Result<RefinedModel> {
    let refined = model
        .refined_avg()
        .ok_or_else(|| Error::Model("model has no refined average".into()))?;
    let kappa = model.radius_avg()?;
    let db = delta_bar(model.center_avg(), opts.search_hi)?;
    let delta = radius_t31(model, opts)
        .or_else(|_| radius_t51(model, opts))?
        .delta;
    let top = delta.min(db).min(refined.domain_hi() * (1.0 - 1e-9));
    for u in geometric_grid(top * 1e-8, top, DEFAULT_GRID_N) {
        let (kb, k) = (refined.eval(u)?, kappa.eval(u)?);
        if kb > k * (1.0 + 1e-12) {
            return Err(Error::Model(format!("refined average exceeds radius average at u = {u}")));
        }
    }
    Ok(RefinedModel {
        model: model.replace_radius(refined.clone()),
        delta_bar: db,
    })
}
