use serde::{Deserialize, Serialize};

use super::{geometric_grid, AverageFunction};
use crate::error::{Error, Result};

const DOMINANCE_GRID: usize = 256;
const DOMINANCE_SLACK: f64 = 1e-12;

/// The κ-average hypotheses attached to a problem: a radius average κ, a
/// center average κ₀ and an optional refined radius average κ̄.
///
/// Construction checks `κ₀ ≤ κ` on a geometric grid of the common domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct LipschitzModel {
    radius_avg: Option<AverageFunction>,
    center_avg: AverageFunction,
    refined_avg: Option<AverageFunction>,
    radius_nondecreasing: bool,
    center_nondecreasing: bool,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<AverageFunction>,
    kappa0: AverageFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa_bar: Option<AverageFunction>,
}

impl TryFrom<ModelSpec> for LipschitzModel {
    type Error = Error;

    fn try_from(s: ModelSpec) -> Result<Self> {
        let m = match s.kappa {
            Some(k) => Self::new(k, s.kappa0)?,
            None => Self::center_only(s.kappa0),
        };
        match s.kappa_bar {
            Some(kb) => m.with_refined(kb),
            None => Ok(m),
        }
    }
}

impl From<LipschitzModel> for ModelSpec {
    fn from(m: LipschitzModel) -> Self {
        Self {
            kappa: m.radius_avg,
            kappa0: m.center_avg,
            kappa_bar: m.refined_avg,
        }
    }
}

/// Samples `lo ≤ hi` on a geometric grid over `(0, limit)`.
fn dominated(lo: &AverageFunction, hi: &AverageFunction, limit: f64) -> Option<f64> {
    let top = limit.min(1e3) * (1.0 - 1e-9);
    for u in geometric_grid(top * 1e-8, top, DOMINANCE_GRID) {
        let (Ok(a), Ok(b)) = (lo.eval(u), hi.eval(u)) else {
            continue;
        };
        if a > b + DOMINANCE_SLACK * b.abs().max(1.0) {
            return Some(u);
        }
    }
    None
}

impl LipschitzModel {
    pub fn new(radius_avg: AverageFunction, center_avg: AverageFunction) -> Result<Self> {
        let limit = radius_avg.domain_hi().min(center_avg.domain_hi());
        if let Some(u) = dominated(&center_avg, &radius_avg, limit) {
            return Err(Error::Model(format!("center average exceeds radius average at u = {u}")));
        }
        Ok(Self {
            radius_nondecreasing: radius_avg.is_nondecreasing(),
            center_nondecreasing: center_avg.is_nondecreasing(),
            radius_avg: Some(radius_avg),
            center_avg,
            refined_avg: None,
        })
    }

    /// A model carrying only κ₀, sufficient for uniqueness radii and the
    /// center-only convergence theory.
    pub fn center_only(center_avg: AverageFunction) -> Self {
        Self {
            radius_nondecreasing: false,
            center_nondecreasing: center_avg.is_nondecreasing(),
            radius_avg: None,
            center_avg,
            refined_avg: None,
        }
    }

    /// Attaches κ̄. Requires `κ₀ ≤ κ̄` and, when κ is present, `κ̄ ≤ κ` on the
    /// sampled grid.
    pub fn with_refined(mut self, refined: AverageFunction) -> Result<Self> {
        let limit = refined.domain_hi().min(self.center_avg.domain_hi());
        if let Some(u) = dominated(&self.center_avg, &refined, limit) {
            return Err(Error::Model(format!("center average exceeds refined average at u = {u}")));
        }
        if let Some(k) = &self.radius_avg {
            let limit = refined.domain_hi().min(k.domain_hi());
            if let Some(u) = dominated(&refined, k, limit) {
                return Err(Error::Model(format!("refined average exceeds radius average at u = {u}")));
            }
        }
        self.refined_avg = Some(refined);
        Ok(self)
    }

    pub fn radius_avg(&self) -> Result<&AverageFunction> {
        self.radius_avg
            .as_ref()
            .ok_or_else(|| Error::Model("model has no radius average (kappa)".into()))
    }

    pub fn radius_avg_opt(&self) -> Option<&AverageFunction> {
        self.radius_avg.as_ref()
    }

    pub fn center_avg(&self) -> &AverageFunction {
        &self.center_avg
    }

    pub fn refined_avg(&self) -> Option<&AverageFunction> {
        self.refined_avg.as_ref()
    }

    pub fn radius_nondecreasing(&self) -> bool {
        self.radius_nondecreasing
    }

    pub fn center_nondecreasing(&self) -> bool {
        self.center_nondecreasing
    }

    /// Smallest `domain_hi` over the averages present.
    pub fn domain_hi(&self) -> f64 {
        [self.radius_avg.as_ref(), Some(&self.center_avg), self.refined_avg.as_ref()]
            .into_iter()
            .flatten()
            .map(AverageFunction::domain_hi)
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy of the model with κ replaced by `radius_avg` (κ̄ dropped).
    pub(crate) fn replace_radius(&self, radius_avg: AverageFunction) -> Self {
        Self {
            radius_nondecreasing: radius_avg.is_nondecreasing(),
            radius_avg: Some(radius_avg),
            center_avg: self.center_avg.clone(),
            center_nondecreasing: self.center_nondecreasing,
            refined_avg: None,
        }
    }
}
