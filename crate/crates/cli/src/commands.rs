use std::path::PathBuf;

use nalgebra::DVector;
use ntraub::averages::{AverageFunction, DEFAULT_QUAD_TOL};
use ntraub::bounds::{self, BoundSequence, ConstantsReport, SeedDistances, Variant};
use ntraub::problems::{self, BenchmarkCase, ValidationReport, VerifyOptions};
use ntraub::radii::{self, closed_form, RadiusOptions, RadiusResult};
use ntraub::reproduce::{self, Example, Reproduction};
use ntraub::solver::{self, IterationTrace, SolveOptions, Status};
use ntraub::{Error, LipschitzModel};
use serde::Serialize;

use crate::config::RunConfig;
use crate::render::{self, fixed, opt, sci};
use crate::{Failure, Format};

/// Closed form and bisection disagreeing by more than this is flagged.
const CROSS_CHECK_TOL: f64 = 1e-8;

pub struct Ctx {
    pub cfg: RunConfig,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<(), Failure> {
        render::emit(self.out.as_deref(), text).map_err(|e| Failure::new(1, format!("{e:#}")))
    }

    fn model(&self) -> Result<&LipschitzModel, Failure> {
        self.cfg.model.as_ref().ok_or_else(|| Failure::config("config has no model"))
    }

    fn case(&self) -> Result<BenchmarkCase, Failure> {
        let name = self.cfg.problem.as_deref().ok_or_else(|| Failure::config("config has no problem"))?;
        Ok(problems::problem_by_name(name)?)
    }

    fn start(&self, case: &BenchmarkCase) -> Result<DVector<f64>, Failure> {
        match &self.cfg.x0 {
            Some(s) => s.resolve(case).map_err(Failure::config),
            None => Ok(case.default_x0.clone()),
        }
    }

    fn solve_options(&self) -> Result<SolveOptions, Failure> {
        let o = &self.cfg.options;
        let mut s = SolveOptions::default();
        if let Some(t) = self.tol.or(o.tol) {
            if !t.is_finite() || t <= 0.0 {
                return Err(Failure::config(format!("tol must be positive, got {t}")));
            }
            s.tol = t;
        }
        if let Some(m) = self.max_iter.or(o.max_iter) {
            s.max_iter = m;
        }
        if let Some(n) = o.norm {
            s.norm = n;
        }
        Ok(s)
    }
}

// ------------------------------------------------------------------ radius

#[derive(Debug, Serialize)]
struct RadiusRow {
    theorem: String,
    #[serde(flatten)]
    result: RadiusResult,
    bisection: f64,
    closed_form: Option<f64>,
    note: String,
}

fn row(label: &str, auto: RadiusResult, bisected: RadiusResult, closed: Option<f64>, note: &str) -> RadiusRow {
    let mut note = note.to_string();
    if let Some(c) = closed {
        if (c - bisected.delta).abs() > CROSS_CHECK_TOL {
            note = format!("{note} closed form differs from bisection by {:.3e}", c - bisected.delta).trim().to_string();
        }
    }
    RadiusRow {
        theorem: label.to_string(),
        result: auto,
        bisection: bisected.delta,
        closed_form: closed,
        note,
    }
}

fn radius_rows(model: &LipschitzModel, opts: &RadiusOptions, a: f64) -> ntraub::Result<Vec<RadiusRow>> {
    let bis = RadiusOptions {
        mode: radii::RadiusMode::Bisection,
        ..*opts
    };
    let k0 = model.center_avg();
    let mut rows = Vec::new();

    if let Some(k) = model.radius_avg_opt() {
        if model.radius_nondecreasing() && model.center_nondecreasing() {
            let closed = match (k, k0) {
                (AverageFunction::Constant { k }, AverageFunction::Constant { k: k0 }) => {
                    Some(closed_form::t31_constant(*k, *k0))
                }
                (AverageFunction::Affine { gamma: g, slope: s }, AverageFunction::Affine { gamma: g0, slope: s0 }) if g == g0 => {
                    Some(closed_form::t31_affine(*g, *s, *s0))
                }
                _ => None,
            };
            rows.push(row("T31", radii::radius_t31(model, opts)?, radii::radius_t31(model, &bis)?, closed, ""));
            if model.refined_avg().is_some() {
                let refined = radii::refined_model(model, opts)?;
                let note = format!("refined average, valid below delta_bar = {:.6}", refined.delta_bar);
                let m = &refined.model;
                rows.push(row("T31 refined", radii::radius_t31(m, opts)?, radii::radius_t31(m, &bis)?, None, &note));
            }
        }
        let closed = match (k, k0) {
            (AverageFunction::Constant { k }, AverageFunction::Constant { k: k0 }) => Some(closed_form::t51_constant(*k, *k0)),
            (AverageFunction::Power { c, a }, AverageFunction::Power { c: c0, a: a0 }) if a == a0 => {
                Some(closed_form::t51_power(*c, *c0, *a))
            }
            _ => None,
        };
        rows.push(row("T51", radii::radius_t51(model, opts)?, radii::radius_t51(model, &bis)?, closed, ""));
        match radii::radius_t51_strong(model, a, opts) {
            Ok(strong) => {
                let closed = match (k, k0) {
                    (AverageFunction::Power { c, a: p }, AverageFunction::Power { c: c0, a: p0 }) if p == p0 => {
                        Some(closed_form::t51_strong_power(*c, *c0, *p))
                    }
                    _ => None,
                };
                let note = format!("kappa_a hypothesis holds for a = {a}");
                rows.push(row("T51Strong", strong, radii::radius_t51_strong(model, a, &bis)?, closed, &note));
            }
            Err(Error::Model(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let (closed, note) = match k0 {
        AverageFunction::Constant { k } => (Some(closed_form::t41_constant(*k)), String::new()),
        AverageFunction::Affine { gamma, slope } => (
            Some(closed_form::t41_affine_exact(*gamma, *slope)),
            match closed_form::t41_affine_alt(*gamma, *slope) {
                Some(p) => format!("alternative affine formula gives {p:.6}"),
                None => "alternative affine formula undefined (negative discriminant)".into(),
            },
        ),
        _ => (None, String::new()),
    };
    rows.push(row(
        "T41",
        radii::radius_uniqueness_t41(k0, opts)?,
        radii::radius_uniqueness_t41(k0, &bis)?,
        closed,
        &note,
    ));

    let closed = match k0 {
        AverageFunction::Constant { k } => Some(closed_form::t52_constant(*k)),
        AverageFunction::Power { c, a } => Some(closed_form::t52_power(*c, *a)),
        AverageFunction::Rational { gamma, c0 } => Some(closed_form::t52_rational(*gamma, *c0)),
        _ => None,
    };
    rows.push(row("T52", radii::radius_t52(k0, opts)?, radii::radius_t52(k0, &bis)?, closed, ""));
    Ok(rows)
}

pub fn radius(ctx: &Ctx) -> Result<u8, Failure> {
    let model = ctx.model()?;
    let opts = RadiusOptions {
        search_hi: ctx.cfg.options.search_hi,
        ..RadiusOptions::default()
    };
    let rows = radius_rows(model, &opts, ctx.cfg.options.a.unwrap_or(1.0))?;
    let headers = ["theorem", "delta", "method", "bisection", "closed_form", "clamped", "note"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.theorem.clone(),
                fixed(r.result.delta),
                format!("{:?}", r.result.method),
                fixed(r.bisection),
                opt(r.closed_form, fixed),
                r.result.clamped.to_string(),
                r.note.clone(),
            ]
        })
        .collect();
    let text = match ctx.format {
        Format::Json => render::json(&rows).map_err(Failure::internal)?,
        Format::Csv => {
            let raw: Vec<Vec<String>> = rows
                .iter()
                .zip(cells)
                .map(|(r, mut c)| {
                    c[1] = r.result.delta.to_string();
                    c[3] = r.bisection.to_string();
                    c[4] = r.closed_form.map(|v| v.to_string()).unwrap_or_default();
                    c
                })
                .collect();
            render::csv_rows(&headers, &raw).map_err(Failure::internal)?
        }
        Format::Table => render::table(&headers, &cells),
    };
    ctx.emit(&text)?;
    Ok(0)
}

// ------------------------------------------------------------------ bounds

fn default_variant(model: &LipschitzModel) -> Variant {
    match model.radius_avg_opt() {
        None => Variant::T52,
        Some(_) if model.radius_nondecreasing() && model.center_nondecreasing() => Variant::T31,
        Some(_) => Variant::T51,
    }
}

#[derive(Debug, Serialize)]
struct Sequences {
    linear: BoundSequence,
    order5: Option<BoundSequence>,
}

fn sequences(report: &ConstantsReport, t_max: usize) -> Sequences {
    let rho = report.seeds.rho_x0;
    let factor = report.e_factor.or(report.f_factor);
    Sequences {
        linear: bounds::error_seq_linear(report.q_product(), rho, t_max),
        order5: factor.map(|f| bounds::error_seq_order5(f, rho, t_max)),
    }
}

/// Seeds from the first step of a trace; `None` if no step was taken or
/// the root is unknown.
fn trace_seeds(trace: &IterationTrace) -> Option<SeedDistances> {
    let r = trace.records.first()?;
    SeedDistances::new(r.err_x?, r.err_y?, r.err_z?).ok()
}

#[derive(Debug, Serialize)]
struct BoundsReport {
    constants: ConstantsReport,
    sequences: Sequences,
    observed: Option<Vec<f64>>,
}

pub fn bounds(ctx: &Ctx) -> Result<u8, Failure> {
    let o = &ctx.cfg.options;
    let (model, seeds, observed) = if ctx.cfg.problem.is_some() {
        let case = ctx.case()?;
        let model = ctx.cfg.model.clone().unwrap_or(case.model.clone());
        let x0 = ctx.start(&case)?;
        let trace = solver::solve(&case.problem, &x0, &ctx.solve_options()?)?;
        let seeds = trace_seeds(&trace).ok_or_else(|| Failure::config("the solve produced no first step to seed the bounds"))?;
        (model, seeds, trace.errors_x())
    } else {
        let d = o.distances.ok_or_else(|| Failure::config("bounds needs a problem or options.distances"))?;
        (ctx.model()?.clone(), SeedDistances::new(d[0], d[1], d[2])?, None)
    };
    let variant = o.variant.unwrap_or_else(|| default_variant(&model));
    let constants = bounds::constants_report(&model, &seeds, variant, DEFAULT_QUAD_TOL)?;
    let t_max = o
        .t_max
        .or_else(|| observed.as_ref().map(|e| e.len().saturating_sub(1).max(1)))
        .unwrap_or(5);
    let report = BoundsReport {
        sequences: sequences(&constants, t_max),
        constants,
        observed,
    };

    let text = match ctx.format {
        Format::Json => render::json(&report).map_err(Failure::internal)?,
        Format::Csv | Format::Table => {
            let seq = &report.sequences;
            let rows: Vec<Vec<String>> = (1..=t_max)
                .map(|t| {
                    let obs = report.observed.as_ref().and_then(|e| e.get(t).copied());
                    vec![
                        t.to_string(),
                        opt(obs, sci),
                        sci(seq.linear.values[t - 1]),
                        opt(seq.order5.as_ref().map(|s| s.values[t - 1]), sci),
                    ]
                })
                .collect();
            let headers = ["t", "observed", "bound_linear", "bound_order5"];
            if ctx.format == Format::Csv {
                render::csv_rows(&headers, &rows).map_err(Failure::internal)?
            } else {
                constants_text(&report.constants) + "\n" + &render::table(&headers, &rows)
            }
        }
    };
    ctx.emit(&text)?;
    Ok(0)
}

fn constants_text(c: &ConstantsReport) -> String {
    let join = |v: &[f64]| v.iter().map(|x| fixed(*x)).collect::<Vec<_>>().join(" ");
    let below = |v: f64| if v < 1.0 { "< 1" } else { ">= 1" };
    let mut s = format!(
        "variant {:?}; seeds rho_x0={} rho_y0={} rho_z0={}\n",
        c.variant,
        sci(c.seeds.rho_x0),
        sci(c.seeds.rho_y0),
        sci(c.seeds.rho_z0)
    );
    if let Some(cs) = &c.c {
        s += &format!("C = {}\n", join(cs));
    }
    s += &format!("q = {} (product {} {})\n", join(&c.q), fixed(c.q_product()), below(c.q_product()));
    if let Some(e) = c.e_factor {
        s += &format!("E = {} {}\n", fixed(e), below(e));
    }
    if let Some(f) = c.f_factor {
        s += &format!("F = {} {}\n", fixed(f), below(f));
    }
    if !c.flags.is_empty() {
        s += &format!("flags: {:?}\n", c.flags);
    }
    s
}

// ------------------------------------------------------------------ solve

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    trace: &'a IterationTrace,
    coc: Option<Vec<f64>>,
    bound_linear: Option<Vec<f64>>,
    bound_order5: Option<Vec<f64>>,
}

pub fn solve(ctx: &Ctx) -> Result<u8, Failure> {
    let case = ctx.case()?;
    let x0 = ctx.start(&case)?;
    let trace = solver::solve(&case.problem, &x0, &ctx.solve_options()?)?;

    // bound columns need the model's hypotheses to hold at the seeds
    let t_max = trace.records.len().saturating_sub(1).max(1);
    let seqs = trace_seeds(&trace).and_then(|d| {
        let r = bounds::constants_report(&case.model, &d, default_variant(&case.model), DEFAULT_QUAD_TOL).ok()?;
        Some(sequences(&r, t_max))
    });
    let bound_at = |t: usize, f: fn(&Sequences) -> Option<&BoundSequence>| -> Option<f64> {
        if t == 0 {
            return trace.records[0].err_x;
        }
        seqs.as_ref().and_then(f).map(|s| s.values[t - 1])
    };
    let coc = solver::coc_estimate(&trace).ok();

    let report = SolveReport {
        trace: &trace,
        coc: coc.clone(),
        bound_linear: seqs.as_ref().map(|s| s.linear.values.clone()),
        bound_order5: seqs.as_ref().and_then(|s| s.order5.as_ref().map(|b| b.values.clone())),
    };
    let errors = trace.errors_x();
    let summary = format!(
        "problem {}: {:?} after {} step(s); final residual {}; COC {}\n",
        trace.problem,
        trace.status,
        trace.steps(),
        sci(trace.last().res_norm),
        match &coc {
            Some(v) => v.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(" "),
            None if errors.is_some() => "unavailable (too few errors above the saturation floor)".into(),
            None => "unavailable (root unknown)".into(),
        }
    );

    let text = match ctx.format {
        Format::Json => render::json(&report).map_err(Failure::internal)?,
        Format::Csv => {
            let headers = ["t", "res_norm", "err_x", "err_y", "err_z", "bound_linear", "bound_order5"];
            let rows: Vec<Vec<String>> = trace
                .records
                .iter()
                .map(|r| {
                    let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                    vec![
                        r.t.to_string(),
                        r.res_norm.to_string(),
                        f(r.err_x),
                        f(r.err_y),
                        f(r.err_z),
                        f(bound_at(r.t, |s| Some(&s.linear))),
                        f(bound_at(r.t, |s| s.order5.as_ref())),
                    ]
                })
                .collect();
            render::csv_rows(&headers, &rows).map_err(Failure::internal)?
        }
        Format::Table => {
            // per-row COC from the triple ending at t, without the floor
            let raw_coc = |t: usize| -> Option<f64> {
                let e = errors.as_ref()?;
                (t >= 2 && e[t] > 0.0 && e[t - 1] > 0.0 && e[t - 2] > 0.0 && e[t - 1] != e[t - 2])
                    .then(|| (e[t] / e[t - 1]).ln() / (e[t - 1] / e[t - 2]).ln())
            };
            let rows: Vec<Vec<String>> = trace
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.t.to_string(),
                        sci(r.res_norm),
                        opt(r.err_x, sci),
                        opt(r.err_y, sci),
                        opt(r.err_z, sci),
                        opt(raw_coc(r.t), fixed),
                    ]
                })
                .collect();
            summary.clone() + &render::table(&["t", "res_norm", "err_x", "err_y", "err_z", "coc"], &rows)
        }
    };
    ctx.emit(&text)?;
    if ctx.format != Format::Table || ctx.out.is_some() {
        eprint!("{summary}");
    }
    Ok(match trace.status {
        Status::Converged => 0,
        Status::SingularJacobian => 3,
        Status::MaxIter | Status::Diverged => 4,
    })
}

// ------------------------------------------------------------------ verify

pub fn verify(ctx: &Ctx) -> Result<u8, Failure> {
    let case = ctx.case()?;
    let model = ctx.cfg.model.as_ref().unwrap_or(&case.model);
    let o = &ctx.cfg.options;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        n_samples: o.samples.unwrap_or(defaults.n_samples),
        seed: ctx.seed.or(o.seed).unwrap_or(defaults.seed),
        radius: o.radius.or(Some(case.domain_radius)),
        mode: o.mode.unwrap_or_default(),
        norm: o.norm.unwrap_or_default(),
        ..defaults
    };
    let r: ValidationReport = problems::verify_model(&case.problem, model, &opts)?;
    let headers = [
        "problem",
        "samples",
        "seed",
        "mode",
        "radius_violations",
        "center_violations",
        "max_radius_ratio",
        "max_center_ratio",
    ];
    let cells = vec![vec![
        r.problem.clone(),
        r.n_samples.to_string(),
        r.seed.to_string(),
        format!("{:?}", r.mode),
        if r.radius_checked { r.radius_violations.to_string() } else { String::new() },
        r.center_violations.to_string(),
        if r.radius_checked { fixed(r.max_radius_ratio) } else { String::new() },
        fixed(r.max_center_ratio),
    ]];
    let text = match ctx.format {
        Format::Json => render::json(&r).map_err(Failure::internal)?,
        Format::Csv => render::csv_rows(&headers, &cells).map_err(Failure::internal)?,
        Format::Table => render::table(&headers, &cells),
    };
    ctx.emit(&text)?;
    Ok(0)
}

// ------------------------------------------------------------------ reproduce

pub fn reproduce(ctx: &Ctx, which: Option<Example>) -> Result<u8, Failure> {
    let examples: Vec<Example> = which.map_or_else(|| Example::ALL.to_vec(), |e| vec![e]);
    // the examples share nothing, so run them side by side
    let results: Vec<ntraub::Result<Reproduction>> = std::thread::scope(|s| {
        let handles: Vec<_> = examples.iter().map(|e| s.spawn(move || reproduce::run(*e))).collect();
        handles.into_iter().map(|h| h.join().expect("reproduction thread panicked")).collect()
    });
    let reps = results.into_iter().collect::<ntraub::Result<Vec<_>>>()?;

    let headers = ["example", "check", "value", "expected", "tol", "status"];
    let rows: Vec<Vec<String>> = reps
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| {
                vec![
                    r.example.name().to_string(),
                    c.name.clone(),
                    fixed(c.value),
                    fixed(c.expected),
                    format!("{:.0e}", c.tol),
                    if c.pass { "ok" } else { "MISMATCH" }.to_string(),
                ]
            })
        })
        .collect();
    let text = match ctx.format {
        Format::Json => render::json(&reps).map_err(Failure::internal)?,
        Format::Csv => render::csv_rows(&headers, &rows).map_err(Failure::internal)?,
        Format::Table => {
            let mut s = render::table(&headers, &rows);
            for r in &reps {
                for (k, v) in &r.sequences {
                    s += &format!("{} {k}: {}\n", r.example.name(), v.iter().map(|x| sci(*x)).collect::<Vec<_>>().join(" "));
                }
                for c in &r.candidates {
                    s += &format!(
                        "{} constant radius average {}: violated at {} of {} construction points (k = 2..={})\n",
                        r.example.name(),
                        c.kappa,
                        c.violating_k.len(),
                        c.k_max - 1,
                        c.k_max
                    );
                }
            }
            s
        }
    };
    ctx.emit(&text)?;
    Ok(if reps.iter().all(Reproduction::passed) { 0 } else { 5 })
}
