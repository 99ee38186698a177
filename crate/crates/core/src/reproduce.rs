//! Recomputes the reference numbers of the three worked examples and
//! compares them with the reference values.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::averages::{AverageFunction, LipschitzModel, DEFAULT_QUAD_TOL};
use crate::bounds::{self, BoundSequence, ConstantsReport, Variant};
use crate::error::Result;
use crate::problems::{self, PointCheck};
use crate::radii::{self, closed_form, RadiusOptions};
use crate::solver::{self, IterationTrace, Norm, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    Ex61,
    Ex62,
    Ex63,
}

impl Example {
    pub const ALL: [Example; 3] = [Example::Ex61, Example::Ex62, Example::Ex63];

    pub fn name(self) -> &'static str {
        match self {
            Example::Ex61 => "ex61",
            Example::Ex62 => "ex62",
            Example::Ex63 => "ex63",
        }
    }
}

/// One computed value against its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, expected: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            expected,
            tol,
            pass: (value - expected).abs() <= tol,
        }
    }

    /// A yes/no assertion recorded as 1 against an expected 1.
    pub fn flag(name: &str, holds: bool) -> Self {
        Self::new(name, if holds { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

/// Violations found for one constant candidate of the radius average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateViolations {
    pub kappa: f64,
    pub k_max: usize,
    pub violating_k: Vec<usize>,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub example: Example,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, f64>,
    pub sequences: BTreeMap<String, Vec<f64>>,
    pub constants: Option<ConstantsReport>,
    pub trace: Option<IterationTrace>,
    pub candidates: Vec<CandidateViolations>,
}

impl Reproduction {
    fn new(example: Example) -> Self {
        Self {
            example,
            checks: Vec::new(),
            values: BTreeMap::new(),
            sequences: BTreeMap::new(),
            constants: None,
            trace: None,
            candidates: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn mismatches(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

pub fn run(example: Example) -> Result<Reproduction> {
    match example {
        Example::Ex61 => ex61(),
        Example::Ex62 => ex62(),
        Example::Ex63 => ex63(),
    }
}

/// Radii of the motivational problem under the plain Lipschitz model
/// (κ₀ = κ), the split model, and the refined model.
pub fn ex61() -> Result<Reproduction> {
    let mut r = Reproduction::new(Example::Ex61);
    let case = problems::make_motivational();
    let opts = RadiusOptions::default();
    let k = AverageFunction::constant(problems::kappa())?;

    let d0 = radii::radius_t31(&LipschitzModel::new(k.clone(), k)?, &opts)?.delta;
    let d1 = radii::radius_t31(&case.model, &opts)?.delta;
    let refined = radii::refined_model(&case.model, &opts)?;
    let d2 = radii::radius_t31(&refined.model, &opts)?.delta;

    for (name, v) in [("delta0", d0), ("delta1", d1), ("delta2", d2)] {
        r.checks.push(Check::new(name, v, case.expected[name], 1e-6));
        r.values.insert(name.to_string(), v);
    }
    r.values.insert("delta_bar".into(), refined.delta_bar);
    r.checks.push(Check::flag("delta0 < delta1 < delta2", d0 < d1 && d1 < d2));
    r.checks.push(Check::flag("delta2 <= delta_bar", d2 <= refined.delta_bar));
    Ok(r)
}

/// The discretized Hammerstein equation: affine-model radius and a solve.
pub fn ex62() -> Result<Reproduction> {
    let mut r = Reproduction::new(Example::Ex62);
    let case = problems::make_hammerstein(8)?;
    let res = radii::radius_t31(&case.model, &RadiusOptions::bisection())?;
    r.checks.push(Check::new("delta_t31", res.delta, case.expected["delta_t31"], 1e-8));
    r.values.insert("delta_t31".into(), res.delta);
    r.values.insert("delta_t31_closed_form".into(), closed_form::t31_affine(0.0, 3.0, 1.5));

    let trace = solver::solve(&case.problem, &case.default_x0, &SolveOptions::default())?;
    r.checks.push(Check::flag("solve converged", trace.status == solver::Status::Converged));
    if let Some(e) = trace.errors_x() {
        r.sequences.insert("err_x".into(), e);
    }
    r.trace = Some(trace);
    Ok(r)
}

/// Constant candidates tried against the scalar-sin radius condition.
pub const EX63_CANDIDATES: [f64; 3] = [1.0, 10.0, 100.0];
/// Largest `k` used for the construction points; `k > κ/2` is needed.
pub const EX63_K_MAX: usize = 200;

/// Radius-condition checks at `x = y = 1/k`, `τ = 2k/(2k+1)`, `k = 2..=k_max`.
pub fn sin_construction_checks(kappa: f64, k_max: usize) -> Result<Vec<(usize, PointCheck)>> {
    let case = problems::make_scalar_sin();
    let c = AverageFunction::constant(kappa)?;
    let model = LipschitzModel::new(c.clone(), c)?;
    let ks: Vec<usize> = (2..=k_max).collect();
    let points: Vec<_> = ks
        .iter()
        .map(|&k| {
            let x = DVector::from_element(1, 1.0 / k as f64);
            let tau = 2.0 * k as f64 / (2.0 * k as f64 + 1.0);
            (x.clone(), x, tau)
        })
        .collect();
    let checks = problems::verify_at_points(&case.problem, &model, &points, Norm::Max)?;
    Ok(ks.into_iter().zip(checks).collect())
}

/// The oscillatory scalar problem: center-only radius, the F-bound
/// sequence from a start inside the ball, and the failure of every
/// constant radius average.
pub fn ex63() -> Result<Reproduction> {
    let mut r = Reproduction::new(Example::Ex63);
    let case = problems::make_scalar_sin();
    let center = case.model.center_avg();
    let delta = radii::radius_t52(center, &RadiusOptions::default())?.delta;
    r.checks.push(Check::new("delta_t52", delta, case.expected["delta_t52"], 1e-12));
    r.values.insert("delta_t52".into(), delta);

    let x0 = &case.default_x0;
    let trace = solver::solve(&case.problem, x0, &SolveOptions::default())?;
    let rec = &trace.records[0];
    let (rx, ry, rz) = (rec.err_x.unwrap_or(0.0), rec.err_y.unwrap_or(0.0), rec.err_z.unwrap_or(0.0));
    let seeds = bounds::SeedDistances::new(rx, ry, rz)?;
    let report = bounds::constants_report(&case.model, &seeds, Variant::T52, DEFAULT_QUAD_TOL)?;
    let t_max = trace.records.len().saturating_sub(1).max(1);
    let f_seq: BoundSequence = bounds::error_seq_order5(report.f_factor.unwrap_or(0.0), rx, t_max);
    let lin_seq = bounds::error_seq_linear(report.q_product(), rx, t_max);
    r.values.insert("F".into(), report.f_factor.unwrap_or(0.0));
    r.values.insert("q_product".into(), report.q_product());
    r.sequences.insert("bound_order5".into(), f_seq.values.clone());
    r.sequences.insert("bound_linear".into(), lin_seq.values.clone());
    if let Some(e) = trace.errors_x() {
        let slack = |b: f64| 1e-12 + 1e-9 * b;
        let dominated = |s: &[f64]| e.iter().skip(1).zip(s).all(|(e, b)| *e <= b + slack(*b));
        r.values.insert("order5_dominates".into(), f64::from(u8::from(dominated(&f_seq.values))));
        r.checks.push(Check::flag("linear bound dominates errors", dominated(&lin_seq.values)));
        r.sequences.insert("err_x".into(), e);
    }
    r.constants = Some(report);
    r.trace = Some(trace);

    for kappa in EX63_CANDIDATES {
        let checks = sin_construction_checks(kappa, EX63_K_MAX)?;
        let violating_k: Vec<usize> = checks.iter().filter(|(_, c)| c.radius_violated).map(|(k, _)| *k).collect();
        let max_ratio = checks
            .iter()
            .filter_map(|(_, c)| Some(c.radius_lhs? / c.radius_rhs?))
            .fold(0.0, f64::max);
        r.checks.push(Check::flag(&format!("constant {kappa} violated"), !violating_k.is_empty()));
        r.candidates.push(CandidateViolations {
            kappa,
            k_max: EX63_K_MAX,
            violating_k,
            max_ratio,
        });
    }
    Ok(r)
}
