//! The three-step Newton–Traub iteration
//!
//! ```text
//! y = x − G'(x)⁻¹ G(x)
//! z = y − G'(x)⁻¹ G(y)
//! x₊ = z − G'(y)⁻¹ G(z)
//! ```
//!
//! Each step factors the Jacobian twice (at `x` and at `y`); the factorization
//! at `x` serves both of the first two solves.

pub mod coc;
mod jacobian;
mod lu;

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FactorStage, Result};
pub use coc::{coc_from_errors, fit_power_law, saturation_floor};
pub use jacobian::{default_fd_step, jacobian_fd};
pub use lu::{lu_solve, LuFactor, PIVOT_REL_TOL};

pub type ResidualFn = Arc<dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync>;

/// Iterates with `‖x‖` above this are reported as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// A square nonlinear system `G(x) = 0`. Evaluators must be re-entrant.
#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    residual: ResidualFn,
    jacobian: Option<JacobianFn>,
    known_root: Option<DVector<f64>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("known_root", &self.known_root)
            .finish()
    }
}

impl Problem {
    pub fn new<F>(name: impl Into<String>, dim: usize, residual: F) -> Self
    where
        F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            residual: Arc::new(residual),
            jacobian: None,
            known_root: None,
        }
    }

    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_root(mut self, root: DVector<f64>) -> Self {
        self.known_root = Some(root);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_root(&self) -> Option<&DVector<f64>> {
        self.known_root.as_ref()
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        let g = (self.residual)(x)?;
        if g.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: g.len(),
            });
        }
        Ok(g)
    }

    /// Analytic Jacobian when available, forward differences otherwise.
    pub fn jacobian(&self, x: &DVector<f64>, fd_step: f64) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        match &self.jacobian {
            Some(j) => j(x),
            None => jacobian_fd(|v| self.residual(v), x, fd_step),
        }
    }

    /// Forward-difference Jacobian regardless of the analytic one.
    pub fn jacobian_fd(&self, x: &DVector<f64>, fd_step: f64) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        jacobian_fd(|v| self.residual(v), x, fd_step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Max,
    Euclidean,
}

impl Norm {
    pub fn vector(self, v: &DVector<f64>) -> f64 {
        match self {
            Norm::Max => v.amax(),
            Norm::Euclidean => v.norm(),
        }
    }

    /// Induced operator norm: max row sum, or the largest singular value.
    pub fn operator(self, m: &DMatrix<f64>) -> f64 {
        match self {
            Norm::Max => m
                .row_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            Norm::Euclidean => m.singular_values().max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop when `‖G(x_t)‖ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub norm: Norm,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            fd_step: default_fd_step(),
            norm: Norm::Max,
        }
    }
}

/// The three sub-iterates of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub x_next: DVector<f64>,
}

fn factor(p: &Problem, at: &DVector<f64>, fd_step: f64, stage: FactorStage) -> Result<LuFactor> {
    LuFactor::new(&p.jacobian(at, fd_step)?).map_err(|e| match e {
        Error::SingularMatrix { column, .. } => Error::SingularJacobian { stage, column },
        other => other,
    })
}

fn step_from(p: &Problem, x: &DVector<f64>, gx: &DVector<f64>, fd_step: f64) -> Result<Step> {
    let jx = factor(p, x, fd_step, FactorStage::AtX)?;
    let y = x - jx.solve(gx)?;
    let z = &y - jx.solve(&p.residual(&y)?)?;
    let jy = factor(p, &y, fd_step, FactorStage::AtY)?;
    let x_next = &z - jy.solve(&p.residual(&z)?)?;
    Ok(Step { y, z, x_next })
}

/// One Newton–Traub step from `x`.
pub fn newton_traub_step(p: &Problem, x: &DVector<f64>, fd_step: f64) -> Result<Step> {
    let gx = p.residual(x)?;
    step_from(p, x, &gx, fd_step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIter,
    SingularJacobian,
    Diverged,
}

/// State at outer iteration `t`. `y`, `z` are absent on the final record
/// (no step was taken from it) and `err_*` are present iff the root is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub z: Option<Vec<f64>>,
    pub res_norm: f64,
    pub err_x: Option<f64>,
    pub err_y: Option<f64>,
    pub err_z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub problem: String,
    pub records: Vec<IterationRecord>,
    pub status: Status,
    /// Which factorization failed, for [`Status::SingularJacobian`].
    pub singular_stage: Option<FactorStage>,
    pub norm: Norm,
}

impl IterationTrace {
    /// Number of Newton–Traub steps taken.
    pub fn steps(&self) -> usize {
        self.records.iter().filter(|r| r.y.is_some()).count()
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("a trace always has its starting record")
    }

    pub fn final_x(&self) -> DVector<f64> {
        DVector::from_vec(self.last().x.clone())
    }

    /// `‖x_t − x*‖` for every record, when the root is known.
    pub fn errors_x(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.err_x).collect()
    }

    /// COC estimates from the outer-iterate errors.
    pub fn coc(&self, floor: f64) -> Result<Vec<f64>> {
        let e = self
            .errors_x()
            .ok_or_else(|| Error::InsufficientData("trace has no known root".into()))?;
        coc_from_errors(&e, floor)
    }

    /// One JSON object per record.
    pub fn to_json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize"))
            .fold(String::new(), |mut s, l| {
                s.push_str(&l);
                s.push('\n');
                s
            })
    }

    /// CSV with columns `t,res_norm,err_x,err_y,err_z`; missing values empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,res_norm,err_x,err_y,err_z\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{:e},{},{},{}",
                r.t,
                r.res_norm,
                fmt_opt(r.err_x),
                fmt_opt(r.err_y),
                fmt_opt(r.err_z)
            );
        }
        s
    }
}

/// `{:e}` for present values, empty otherwise.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// `coc_estimate` over a trace with the default saturation floor.
pub fn coc_estimate(trace: &IterationTrace) -> Result<Vec<f64>> {
    trace.coc(saturation_floor())
}

/// Runs the iteration from `x0`. At least one step is always taken. A
/// singular Jacobian ends the trace with [`Status::SingularJacobian`];
/// evaluator failures are returned as errors.
pub fn solve(p: &Problem, x0: &DVector<f64>, opts: &SolveOptions) -> Result<IterationTrace> {
    if opts.max_iter == 0 {
        return Err(crate::error::domain("max_iter", 0.0, "must be at least 1"));
    }
    if !(opts.tol > 0.0) {
        return Err(crate::error::domain("tol", opts.tol, "must be positive"));
    }
    p.check_dim(x0)?;
    let norm = opts.norm;
    let err = |v: &DVector<f64>| p.known_root().map(|r| norm.vector(&(v - r)));
    let mut records = Vec::new();
    let mut x = x0.clone();
    let mut singular_stage = None;

    let status = 'outer: {
        for t in 0..=opts.max_iter {
            let gx = p.residual(&x)?;
            let mut rec = IterationRecord {
                t,
                x: x.as_slice().to_vec(),
                y: None,
                z: None,
                res_norm: norm.vector(&gx),
                err_x: err(&x),
                err_y: None,
                err_z: None,
            };
            let finite = rec.res_norm.is_finite() && x.iter().all(|v| v.is_finite());
            let verdict = if !finite || norm.vector(&x) > DIVERGENCE_NORM {
                Some(Status::Diverged)
            } else if t > 0 && rec.res_norm <= opts.tol {
                Some(Status::Converged)
            } else if t == opts.max_iter {
                Some(Status::MaxIter)
            } else {
                None
            };
            if let Some(s) = verdict {
                records.push(rec);
                break 'outer s;
            }
            match step_from(p, &x, &gx, opts.fd_step) {
                Ok(step) => {
                    rec.err_y = err(&step.y);
                    rec.err_z = err(&step.z);
                    rec.y = Some(step.y.as_slice().to_vec());
                    rec.z = Some(step.z.as_slice().to_vec());
                    records.push(rec);
                    x = step.x_next;
                }
                Err(Error::SingularJacobian { stage, .. }) => {
                    singular_stage = Some(stage);
                    records.push(rec);
                    break 'outer Status::SingularJacobian;
                }
                Err(e) => return Err(e),
            }
        }
        unreachable!("the loop ends at t == max_iter")
    };

    Ok(IterationTrace {
        problem: p.name().to_string(),
        records,
        status,
        singular_stage,
        norm,
    })
}
