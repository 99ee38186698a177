use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::averages::{LipschitzModel, DEFAULT_QUAD_TOL};
use crate::error::{Error, Result};
use crate::solver::LuFactor;
use crate::solver::{Norm, Problem};

/// Relative slack before a sample counts as a violation.
const SLACK: f64 = 1e-12;

/// How the pair `(x, y)` in the radius condition is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// `y = x`: the pairs the convergence proofs actually use.
    #[default]
    SamePoint,
    /// `x` and `y` drawn independently.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Sampling ball radius; defaults to the model's domain, capped at 1.
    pub radius: Option<f64>,
    pub mode: SampleMode,
    pub norm: Norm,
    pub fd_step: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            seed: 42,
            radius: None,
            mode: SampleMode::SamePoint,
            norm: Norm::Max,
            fd_step: crate::solver::default_fd_step(),
        }
    }
}

/// One evaluated sample `(x, y, τ)`; `None` sides mean the check was skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tau: f64,
    pub radius_lhs: Option<f64>,
    pub radius_rhs: Option<f64>,
    pub center_lhs: f64,
    pub center_rhs: f64,
    pub radius_violated: bool,
    pub center_violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub problem: String,
    pub n_samples: usize,
    pub seed: u64,
    pub mode: SampleMode,
    pub ball_radius: f64,
    pub radius_checked: bool,
    pub radius_violations: usize,
    pub center_violations: usize,
    /// Largest `lhs/rhs` seen; `inf` when a positive lhs met a zero rhs.
    pub max_radius_ratio: f64,
    pub max_center_ratio: f64,
    pub worst_radius: Option<PointCheck>,
    pub worst_center: Option<PointCheck>,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= SLACK * rhs.max(1e-300) || lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

fn violated(lhs: f64, rhs: f64) -> bool {
    lhs > rhs * (1.0 + SLACK) + f64::EPSILON * SLACK
}

struct Checker<'a> {
    problem: &'a Problem,
    model: &'a LipschitzModel,
    root: DVector<f64>,
    jinv: DMatrix<f64>,
    j_root: DMatrix<f64>,
    norm: Norm,
    fd: f64,
}

impl<'a> Checker<'a> {
    fn new(problem: &'a Problem, model: &'a LipschitzModel, norm: Norm, fd: f64) -> Result<Self> {
        let root = problem
            .known_root()
            .cloned()
            .ok_or_else(|| Error::Model(format!("problem {} has no known root", problem.name())))?;
        let j_root = problem.jacobian(&root, fd)?;
        let lu = LuFactor::new(&j_root)?;
        let n = root.len();
        let mut jinv = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut e = DVector::zeros(n);
            e[k] = 1.0;
            jinv.set_column(k, &lu.solve(&e)?);
        }
        Ok(Self { problem, model, root, jinv, j_root, norm, fd })
    }

    fn check(&self, x: &DVector<f64>, y: &DVector<f64>, tau: f64) -> Result<PointCheck> {
        let rx = self.norm.vector(&(x - &self.root));
        let ry = self.norm.vector(&(y - &self.root));
        let jx = self.problem.jacobian(x, self.fd)?;

        let (radius_lhs, radius_rhs) = match self.model.radius_avg_opt() {
            Some(k) => {
                let y_tau = &self.root + tau * (y - &self.root);
                let jy = self.problem.jacobian(&y_tau, self.fd)?;
                let lhs = self.norm.operator(&(&self.jinv * (&jx - jy)));
                let rhs = k.integral_tail(tau * (rx + ry), rx + ry, DEFAULT_QUAD_TOL)?;
                (Some(lhs), Some(rhs))
            }
            None => (None, None),
        };

        let x_tau = &self.root + tau * (x - &self.root);
        let jxt = self.problem.jacobian(&x_tau, self.fd)?;
        let center_lhs = self.norm.operator(&(&self.jinv * (jxt - &self.j_root)));
        let center_rhs = self.model.center_avg().integral_k(2.0 * tau * rx, DEFAULT_QUAD_TOL)?;

        Ok(PointCheck {
            x: x.iter().copied().collect(),
            y: y.iter().copied().collect(),
            tau,
            radius_violated: matches!((radius_lhs, radius_rhs), (Some(l), Some(r)) if violated(l, r)),
            center_violated: violated(center_lhs, center_rhs),
            radius_lhs,
            radius_rhs,
            center_lhs,
            center_rhs,
        })
    }
}

/// Evaluates both Lipschitz conditions at explicit `(x, y, τ)` triples.
pub fn verify_at_points(
    problem: &Problem,
    model: &LipschitzModel,
    points: &[(DVector<f64>, DVector<f64>, f64)],
    norm: Norm,
) -> Result<Vec<PointCheck>> {
    let c = Checker::new(problem, model, norm, crate::solver::default_fd_step())?;
    points.iter().map(|(x, y, t)| c.check(x, y, *t)).collect()
}

fn sample_ball(rng: &mut ChaCha8Rng, center: &DVector<f64>, r: f64, norm: Norm) -> DVector<f64> {
    let n = center.len();
    match norm {
        Norm::Max => center + DVector::from_fn(n, |_, _| rng.random_range(-r..=r)),
        Norm::Euclidean => {
            let d = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let scale = r * rng.random::<f64>().powf(1.0 / n as f64) / d.norm().max(f64::MIN_POSITIVE);
            center + d * scale
        }
    }
}

/// Monte-Carlo check of the radius and center conditions on a ball around
/// the known root. Deterministic for a fixed seed.
pub fn verify_model(problem: &Problem, model: &LipschitzModel, opts: &VerifyOptions) -> Result<ValidationReport> {
    let c = Checker::new(problem, model, opts.norm, opts.fd_step)?;
    let ball = opts.radius.unwrap_or_else(|| model.domain_hi().min(1.0));
    if !(ball > 0.0 && ball.is_finite()) {
        return Err(crate::error::domain("ball radius", ball, "must be positive and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = ValidationReport {
        problem: problem.name().to_string(),
        n_samples: opts.n_samples,
        seed: opts.seed,
        mode: opts.mode,
        ball_radius: ball,
        radius_checked: model.radius_avg_opt().is_some(),
        radius_violations: 0,
        center_violations: 0,
        max_radius_ratio: 0.0,
        max_center_ratio: 0.0,
        worst_radius: None,
        worst_center: None,
    };
    for _ in 0..opts.n_samples {
        let x = sample_ball(&mut rng, &c.root, ball, opts.norm);
        let y = match opts.mode {
            SampleMode::SamePoint => x.clone(),
            SampleMode::Independent => sample_ball(&mut rng, &c.root, ball, opts.norm),
        };
        let tau: f64 = rng.random();
        let pc = c.check(&x, &y, tau)?;
        report.radius_violations += usize::from(pc.radius_violated);
        report.center_violations += usize::from(pc.center_violated);
        if let (Some(l), Some(r)) = (pc.radius_lhs, pc.radius_rhs) {
            let q = ratio(l, r);
            if q > report.max_radius_ratio {
                report.max_radius_ratio = q;
                report.worst_radius = Some(pc.clone());
            }
        }
        let q = ratio(pc.center_lhs, pc.center_rhs);
        if q > report.max_center_ratio {
            report.max_center_ratio = q;
            report.worst_center = Some(pc);
        }
    }
    Ok(report)
}
