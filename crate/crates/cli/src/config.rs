use std::path::Path;

use anyhow::{Context, Result};
use nalgebra::DVector;
use ntraub::bounds::Variant;
use ntraub::problems::{BenchmarkCase, SampleMode};
use ntraub::solver::Norm;
use ntraub::LipschitzModel;
use serde::Deserialize;

/// Config file contents; every key is optional and only read by the
/// commands that need it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<LipschitzModel>,
    pub problem: Option<String>,
    pub x0: Option<StartSpec>,
    #[serde(default)]
    pub options: Options,
}

/// A start vector, a constant filling every component, or `"default"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Vector(Vec<f64>),
    Fill(f64),
    Preset(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub norm: Option<Norm>,
    /// Exponent for the κ_a hypothesis.
    pub a: Option<f64>,
    pub search_hi: Option<f64>,
    /// `[ρ(x₀), ρ(y₀), ρ(z₀)]` for the bounds command without a problem.
    pub distances: Option<[f64; 3]>,
    pub variant: Option<Variant>,
    pub t_max: Option<usize>,
    pub samples: Option<usize>,
    pub mode: Option<SampleMode>,
    pub radius: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl StartSpec {
    pub fn resolve(&self, case: &BenchmarkCase) -> Result<DVector<f64>, String> {
        let n = case.problem.dim();
        match self {
            StartSpec::Vector(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
            StartSpec::Vector(v) => Err(format!("x0 has {} components, problem {} needs {n}", v.len(), case.problem.name())),
            StartSpec::Fill(c) => Ok(DVector::from_element(n, *c)),
            StartSpec::Preset(p) if p == "default" => Ok(case.default_x0.clone()),
            StartSpec::Preset(p) => Err(format!("unknown x0 preset {p:?}")),
        }
    }
}
