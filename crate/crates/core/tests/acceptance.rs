//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines always
//! print.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use ntraub::averages::{adaptive_quadrature, geometric_grid, AverageFunction, DEFAULT_QUAD_TOL};
use ntraub::bounds::{self, SeedDistances, Variant};
use ntraub::problems::{self, scalar_sin, BenchmarkCase};
use ntraub::radii::{self, closed_form, Method, RadiusOptions};
use ntraub::reproduce;
use ntraub::solver::{self, saturation_floor, IterationTrace, SolveOptions};
use ntraub::LipschitzModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Domination slack: `1e-12 + 1e-9·bound`.
fn slack(bound: f64) -> f64 {
    1e-12 + 1e-9 * bound
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

// ---------------------------------------------------------------- 1, 2, 3

fn criterion_1() -> Outcome {
    let r = reproduce::ex61().expect("ex61 runs");
    let v = &r.values;
    Outcome::new(
        r.passed(),
        format!(
            "delta0={:.6} delta1={:.6} delta2={:.6} (tol 1e-6, ordered: {}); mismatches: {:?}",
            v["delta0"],
            v["delta1"],
            v["delta2"],
            v["delta0"] < v["delta1"] && v["delta1"] < v["delta2"],
            r.mismatches().iter().map(|c| &c.name).collect::<Vec<_>>()
        ),
    )
}

fn criterion_2() -> Outcome {
    let k0 = AverageFunction::constant(1.0).unwrap();
    let r = radii::radius_t52(&k0, &RadiusOptions::default()).unwrap();
    let b = radii::radius_t52(&k0, &RadiusOptions::bisection()).unwrap();
    let err = (r.delta - 1.0 / 6.0).abs();
    Outcome::new(
        err <= 1e-12,
        format!("delta={:.15} |delta-1/6|={err:.1e} (tol 1e-12); bisection gives {:.15}", r.delta, b.delta),
    )
}

fn criterion_3() -> Outcome {
    let case = problems::make_hammerstein(8).unwrap();
    let r = radii::radius_t31(&case.model, &RadiusOptions::bisection()).unwrap();
    let err = (r.delta - 1.0 / 7f64.sqrt()).abs();
    Outcome::new(
        err <= 1e-8 && r.method == Method::Bisection,
        format!("delta={:.12} |delta-1/sqrt7|={err:.1e} (tol 1e-8)", r.delta),
    )
}

// ---------------------------------------------------------------- 4

fn random_average(rng: &mut ChaCha8Rng, i: usize) -> AverageFunction {
    match i % 4 {
        0 => AverageFunction::constant(rng.random_range(0.1..10.0)),
        1 => AverageFunction::affine(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)),
        2 => AverageFunction::power(rng.random_range(0.1..5.0), rng.random_range(0.3..=1.0)),
        _ => AverageFunction::rational(rng.random_range(0.2..5.0), rng.random_range(0.1..5.0)),
    }
    .unwrap()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_int, mut worst_rad) = (0.0f64, 0.0f64);
    let mut radius_checks = 0;
    for i in 0..200 {
        let f = random_average(&mut rng, i);
        let top = if f.domain_hi().is_finite() { 0.9 * f.domain_hi() } else { 3.0 };
        for _ in 0..5 {
            let s = rng.random_range(1e-3..1.0) * top;
            let qk = adaptive_quadrature(|u| f.eval(u).unwrap(), 0.0, s, 1e-13).unwrap();
            let qm = adaptive_quadrature(|u| f.eval(u).unwrap() * u, 0.0, s, 1e-13).unwrap();
            worst_int = worst_int
                .max(rel_diff(f.integral_k(s, DEFAULT_QUAD_TOL).unwrap(), qk))
                .max(rel_diff(f.integral_m(s, DEFAULT_QUAD_TOL).unwrap(), qm));
        }

        let bis = RadiusOptions::bisection();
        let mut cmp = |closed: f64, bisected: f64| {
            worst_rad = worst_rad.max((closed - bisected).abs());
            radius_checks += 1;
        };
        match f {
            AverageFunction::Constant { k } => {
                let k0 = k * rng.random_range(0.2..1.0);
                let m = LipschitzModel::new(f.clone(), AverageFunction::constant(k0).unwrap()).unwrap();
                cmp(closed_form::t31_constant(k, k0), radii::radius_t31(&m, &bis).unwrap().delta);
                cmp(closed_form::t41_constant(k0), radii::radius_uniqueness_t41(m.center_avg(), &bis).unwrap().delta);
            }
            AverageFunction::Power { c, a } => {
                cmp(closed_form::t52_power(c, a), radii::radius_t52(&f, &bis).unwrap().delta);
            }
            AverageFunction::Rational { gamma, c0 } => {
                cmp(closed_form::t52_rational(gamma, c0), radii::radius_t52(&f, &bis).unwrap().delta);
            }
            _ => {}
        }
    }
    Outcome::new(
        worst_int <= 1e-9 && worst_rad <= 1e-8,
        format!(
            "200 models: worst integral rel diff {worst_int:.1e} (tol 1e-9); {radius_checks} radii, worst |closed-bisection| {worst_rad:.1e} (tol 1e-8)"
        ),
    )
}

// ---------------------------------------------------------------- 5

/// Seeds of the first step of a trace.
fn seeds(trace: &IterationTrace) -> SeedDistances {
    let r = &trace.records[0];
    SeedDistances::new(r.err_x.unwrap(), r.err_y.unwrap(), r.err_z.unwrap()).unwrap()
}

fn order_check(case: &BenchmarkCase, x0: &DVector<f64>) -> (bool, String) {
    let trace = solver::solve(&case.problem, x0, &SolveOptions::default()).unwrap();
    let e = trace.errors_x().unwrap();
    let floor = saturation_floor();
    let coc = solver::coc_from_errors(&e, floor);
    let d = seeds(&trace);
    let c = bounds::constants_c(&case.model, &d, DEFAULT_QUAD_TOL).unwrap();
    let k_theory = bounds::fifth_order_coefficient(&c, &d).unwrap_or(f64::INFINITY);
    let law_holds = e
        .windows(2)
        .filter(|w| w[0] > floor && w[1] > floor)
        .all(|w| w[1] <= k_theory * w[0].powi(5) + slack(k_theory * w[0].powi(5)));
    let in_band = matches!(&coc, Ok(v) if v.iter().all(|c| (4.0..=6.0).contains(c)));
    let unfloored = solver::coc_from_errors(&e, 0.0).unwrap_or_default();
    let coc_txt = match &coc {
        Ok(v) => format!("{v:.2?}"),
        Err(_) => "none (no triple above the saturation floor)".into(),
    };
    (
        in_band && law_holds,
        format!(
            "{}: errors {}; COC {coc_txt}; unfloored COC {unfloored:.2?}; e_(t+1) <= K e_t^5 with K={k_theory:.3e}: {law_holds}",
            case.problem.name(),
            e.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let m = problems::make_motivational();
    let h = problems::make_hammerstein(8).unwrap();
    let (p1, d1) = order_check(&m, &DVector::from_element(3, 0.3));
    let (p2, d2) = order_check(&h, &DVector::from_element(8, 0.3));
    Outcome::new(p1 && p2, format!("COC band [4, 6], floor {:.1e}\n      {d1}\n      {d2}", saturation_floor()))
}

// ---------------------------------------------------------------- 6, 7

struct Run {
    rho0: f64,
    trace: IterationTrace,
}

struct Radii {
    t31: f64,
    t51: f64,
    t52: f64,
}

fn motivational_runs() -> (BenchmarkCase, Radii, Vec<Run>) {
    let case = problems::make_motivational();
    let o = RadiusOptions::default();
    let r = Radii {
        t31: radii::radius_t31(&case.model, &o).unwrap().delta,
        t51: radii::radius_t51(&case.model, &o).unwrap().delta,
        t52: radii::radius_t52(case.model.center_avg(), &o).unwrap().delta,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let runs = (0..50)
        .map(|_| {
            let x0 = DVector::from_fn(3, |_, _| rng.random_range(-r.t31..r.t31));
            let trace = solver::solve(&case.problem, &x0, &SolveOptions::default()).unwrap();
            Run { rho0: x0.amax(), trace }
        })
        .collect();
    (case, r, runs)
}

fn criterion_6() -> Outcome {
    let (case, radii, runs) = motivational_runs();
    let mut step_viol = [0usize; 3];
    let mut worst = [0.0f64; 3];
    let (mut seq_checked, mut seq_viol) = (0usize, 0usize);
    let mut example = None;
    for run in &runs {
        let recs = &run.trace.records;
        for (i, r) in recs.iter().enumerate() {
            let (Some(ex), Some(ey), Some(ez)) = (r.err_x, r.err_y, r.err_z) else { continue };
            let next = recs.get(i + 1).and_then(|n| n.err_x).unwrap_or(0.0);
            let b = bounds::step_bounds(&case.model, ex, ey, ez, Variant::T31, DEFAULT_QUAD_TOL).unwrap();
            for (k, obs) in [ey, ez, next].into_iter().enumerate() {
                if b[k] > 0.0 {
                    worst[k] = worst[k].max(obs / b[k]);
                }
                if obs > b[k] + slack(b[k]) {
                    step_viol[k] += 1;
                    if example.is_none() && k == 1 {
                        example = Some(format!("x_t={:?}: ||z_t-x*||={obs:.3e} > bound {:.3e}", r.x, b[k]));
                    }
                }
            }
        }
        if run.rho0 < radii.t51 {
            let q = bounds::constants_q_t51(&case.model, &seeds(&run.trace), DEFAULT_QUAD_TOL).unwrap();
            let e = run.trace.errors_x().unwrap();
            let seq = bounds::error_seq_linear(q.iter().product(), run.rho0, e.len() - 1);
            seq_checked += 1;
            if e.iter().skip(1).zip(&seq.values).any(|(e, b)| *e > b + slack(*b)) {
                seq_viol += 1;
            }
        }
    }
    Outcome::new(
        step_viol == [0; 3] && seq_viol == 0,
        format!(
            "50 starts in B(x*, {:.6}); per-step violations y/z/x+ = {step_viol:?}, worst obs/bound {worst:.3?}; linear sequence: {seq_viol} of {seq_checked} traces violated{}",
            radii.t31,
            example.map(|s| format!("\n      e.g. {s}")).unwrap_or_default()
        ),
    )
}

fn criterion_7() -> Outcome {
    let (case, radii, runs) = motivational_runs();
    let (mut c_bad, mut q51_bad, mut q52_bad) = (0, 0, 0);
    let (mut n51, mut n52) = (0, 0);
    let (mut c_max, mut q51_max, mut q52_max) = (0.0f64, 0.0f64, 0.0f64);
    let max3 = |v: &[f64; 3]| v.iter().copied().fold(0.0, f64::max);
    for run in &runs {
        let d = seeds(&run.trace);
        let c = bounds::constants_c(&case.model, &d, DEFAULT_QUAD_TOL).unwrap();
        c_max = c_max.max(max3(&c));
        c_bad += usize::from(max3(&c) >= 1.0);
        if run.rho0 < radii.t51 {
            n51 += 1;
            let q = bounds::constants_q_t51(&case.model, &d, DEFAULT_QUAD_TOL).unwrap();
            q51_max = q51_max.max(max3(&q));
            q51_bad += usize::from(max3(&q) >= 1.0);
        }
        if run.rho0 < radii.t52 {
            n52 += 1;
            let q = bounds::constants_q_t52(case.model.center_avg(), &d, DEFAULT_QUAD_TOL).unwrap();
            q52_max = q52_max.max(max3(&q));
            q52_bad += usize::from(max3(&q) >= 1.0);
        }
    }
    Outcome::new(
        c_bad + q51_bad + q52_bad == 0,
        format!(
            "C over 50 starts: max {c_max:.4}; weak-average q over {n51} starts in B(x*, {:.6}): max {q51_max:.4}; center-only q over {n52} starts in B(x*, {:.6}): max {q52_max:.4}",
            radii.t51, radii.t52
        ),
    )
}

// ---------------------------------------------------------------- 8

fn decreases(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] < w[0] - 1e-12 * w[0].abs()).count()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut m_dec, mut phi_dec, mut phi_cases, mut non_monotone) = (0, 0, 0, 0);
    for i in 0..50 {
        // non-decreasing κ for the M(s)/s² property
        let f = match i % 4 {
            // power averages are non-increasing; use a second affine slot
            2 => random_average(&mut rng, 1),
            _ => random_average(&mut rng, i),
        };
        let hi = if f.domain_hi().is_finite() { 0.99 * f.domain_hi() } else { 10.0 };
        let grid = geometric_grid(hi * 1e-6, hi, 512);
        let ratio: Vec<f64> = grid.iter().map(|s| f.integral_m(*s, DEFAULT_QUAD_TOL).unwrap() / (s * s)).collect();
        m_dec += decreases(&ratio);

        // κ_a hypothesis, including power κ that is itself decreasing
        let g = random_average(&mut rng, i);
        let a = match g {
            AverageFunction::Power { a: p, .. } => rng.random_range(0.0..p.min(1.0)),
            _ => rng.random_range(0.0..=1.0),
        };
        let hi = if g.domain_hi().is_finite() { 0.99 * g.domain_hi() } else { 10.0 };
        if !g.is_nondecreasing_kappa_a(a, hi, 512) {
            continue;
        }
        non_monotone += usize::from(!g.is_nondecreasing());
        let grid = geometric_grid(hi * 1e-6, hi, 512);
        for beta in [0.0, 1.0] {
            let phi: Vec<f64> = grid.iter().map(|p| g.phi(beta, a, *p, DEFAULT_QUAD_TOL).unwrap()).collect();
            phi_dec += decreases(&phi);
            phi_cases += 1;
        }
    }
    Outcome::new(
        m_dec == 0 && phi_dec == 0 && phi_cases > 0,
        format!(
            "50 models on 512-point grids: M(s)/s^2 decreases {m_dec}; phi decreases {phi_dec} over {phi_cases} (model, beta) pairs, {non_monotone} with decreasing kappa"
        ),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    // a constant κ is refuted at k iff 2k > κ, so every candidate below 100
    // is refuted somewhere in k = 2..=50
    let candidates = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 99.0];
    let mut lines = Vec::new();
    let mut pass = true;
    for kappa in candidates {
        let checks = reproduce::sin_construction_checks(kappa, 50).unwrap();
        let violating: Vec<usize> = checks.iter().filter(|(_, c)| c.radius_violated).map(|(k, _)| *k).collect();
        let predicted: Vec<usize> = (2..=50).filter(|&k| 2.0 * k as f64 > kappa).collect();
        pass &= !violating.is_empty() && violating == predicted;
        lines.push(format!("kappa={kappa}: {} of 49 points violated", violating.len()));
    }
    Outcome::new(pass, lines.join("; "))
}

// ---------------------------------------------------------------- 10

/// Sign changes between consecutive samples; returns the count and whether
/// each change brackets `0`.
fn sign_changes(xs: &[f64], g: &[f64]) -> (usize, bool) {
    let mut n = 0;
    let mut at_root = true;
    for i in 1..g.len() {
        if g[i - 1].signum() != g[i].signum() || g[i] == 0.0 {
            n += 1;
            at_root &= xs[i - 1] <= 0.0 && xs[i] >= 0.0;
        }
    }
    (n, at_root)
}

/// `N` midpoints of the open interval `(−δ, δ)`.
fn open_grid(delta: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -delta + 2.0 * delta * (i as f64 + 0.5) / n as f64).collect()
}

fn criterion_10() -> Outcome {
    const N: usize = 100_000;
    let mut pass = true;
    let mut parts = Vec::new();

    let sin_case = problems::make_scalar_sin();
    let d = radii::radius_uniqueness_t41(sin_case.model.center_avg(), &RadiusOptions::default()).unwrap().delta;
    let xs = open_grid(d, N);
    let g = scalar_sin::residual_sweep(&xs).unwrap();
    let (n, ok) = sign_changes(&xs, &g);
    pass &= n == 1 && ok;
    parts.push(format!("scalar-sin on (-{d:.6}, {d:.6}): {n} sign change(s)"));

    let m = problems::make_motivational();
    let d = radii::radius_uniqueness_t41(m.model.center_avg(), &RadiusOptions::default()).unwrap().delta;
    let xs = open_grid(d, N);
    for axis in 0..3 {
        let g: Vec<f64> = xs.iter().map(|s| problems::restriction(axis, *s)).collect();
        let (n, ok) = sign_changes(&xs, &g);
        pass &= n == 1 && ok;
        parts.push(format!("motivational axis {axis} on (-{d:.6}, {d:.6}): {n}"));
    }
    Outcome::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------- driver

/// Number, title, time limit in seconds, check.
type Criterion = (u8, &'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "example radii delta0 < delta1 < delta2", 1, criterion_1),
        (2, "center-only radius 1/6", 1, criterion_2),
        (3, "affine-model radius 1/sqrt(7)", 1, criterion_3),
        (4, "closed forms vs quadrature and bisection", 30, criterion_4),
        (5, "fifth-order behavior", 5, criterion_5),
        (6, "bound domination", 10, criterion_6),
        (7, "contraction constants below 1", 10, criterion_7),
        (8, "monotonicity properties", 10, criterion_8),
        (9, "no constant radius average for the oscillatory problem", 5, criterion_9),
        (10, "uniqueness ball sign scan", 5, criterion_10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, title, limit, f) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let pass = outcome.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "{} criterion {id:>2}: {title} [{:.3}s / {limit}s{}]\n      {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time limit" },
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
