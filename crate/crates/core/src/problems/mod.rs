//! Benchmark problems with their Lipschitz models, and model verification.

mod hammerstein;
mod motivational;
pub mod scalar_sin;
mod verify;

use std::collections::BTreeMap;

use nalgebra::DVector;

pub use hammerstein::{gauss_legendre_unit, make_hammerstein};
pub use motivational::{kappa, kappa0, kappa_bar, make_motivational, restriction, QUAD_COEF};
pub use scalar_sin::make_scalar_sin;
pub use verify::{verify_at_points, verify_model, PointCheck, SampleMode, ValidationReport, VerifyOptions};

use crate::averages::LipschitzModel;
use crate::error::{Error, Result};
use crate::solver::Problem;

/// A problem together with the model it is known to satisfy.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub problem: Problem,
    pub model: LipschitzModel,
    /// Reference values keyed by name.
    pub expected: BTreeMap<String, f64>,
    /// Radius of the ball around the root on which the model holds.
    pub domain_radius: f64,
    pub default_x0: DVector<f64>,
}

/// `"motivational"`, `"hammerstein:<n>"` (n ≥ 2) or `"scalar-sin"`.
pub fn problem_by_name(name: &str) -> Result<BenchmarkCase> {
    match name {
        "motivational" => Ok(make_motivational()),
        "scalar-sin" => Ok(make_scalar_sin()),
        _ => match name.strip_prefix("hammerstein:").map(str::parse::<usize>) {
            Some(Ok(n)) if n >= 2 => make_hammerstein(n),
            _ => Err(Error::UnknownProblem(name.to_string())),
        },
    }
}
