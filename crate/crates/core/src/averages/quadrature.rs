//! Globally adaptive Gauss-Kronrod (G7-K15) integration.
//!
//! Every rule node lies strictly inside its panel, so integrands with
//! integrable endpoint singularities (e.g. `u^(a-1)` at 0) are never
//! evaluated at the singular point. The panel with the largest error
//! estimate is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const EVALS_PER_PANEL: usize = 15;

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Target relative error of the whole integral.
    pub rel_tol: f64,
    /// Absolute error that is always accepted (0 disables it).
    pub abs_tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_evals: 1_000_000,
        }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Value and bookkeeping returned by [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
    res_abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);

    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for (j, wg) in WG.iter().take(3).enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += wg * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    let abs_half = half.abs();
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    Panel {
        lo,
        hi,
        value: res_kronrod * half,
        err: rescale_error(err, res_abs, res_asc),
        res_abs,
    }
}

fn splittable(p: &Panel) -> bool {
    let mid = 0.5 * (p.lo + p.hi);
    mid > p.lo && mid < p.hi && (p.hi - p.lo) > 1e3 * f64::MIN_POSITIVE
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[lo, hi], opts)
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, seeding one panel per
/// consecutive pair of break points. Breaks must be non-decreasing.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        });
    }
    if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(crate::error::domain(
            "quadrature",
            breaks[0],
            "break points must be finite and non-decreasing",
        ));
    }

    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Panel> = Vec::new();
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&f, w[0], w[1]));
            evals += EVALS_PER_PANEL;
        }
    }

    loop {
        let (value, err, res_abs) = heap
            .iter()
            .chain(settled.iter())
            .fold((0.0, 0.0, 0.0), |(v, e, r), p| (v + p.value, e + p.err, r + p.res_abs));
        if !value.is_finite() {
            return Err(Error::Quadrature {
                tol: opts.rel_tol,
                evals,
                estimate: value,
                abs_err: err,
            });
        }
        let target = (opts.rel_tol * value.abs()).max(opts.abs_tol);
        let roundoff = 50.0 * f64::EPSILON * res_abs;
        if err <= target || err <= roundoff {
            return Ok(QuadResult {
                value,
                abs_err: err,
                evals,
            });
        }

        let Some(worst) = heap.pop() else {
            // every remaining panel is at floating-point resolution
            return Err(Error::Quadrature {
                tol: opts.rel_tol,
                evals,
                estimate: value,
                abs_err: err,
            });
        };
        if !splittable(&worst) {
            settled.push(worst);
            continue;
        }
        if evals + 2 * EVALS_PER_PANEL > opts.max_evals {
            return Err(Error::Quadrature {
                tol: opts.rel_tol,
                evals,
                estimate: value,
                abs_err: err,
            });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        heap.push(gk15(&f, worst.lo, mid));
        heap.push(gk15(&f, mid, worst.hi));
        evals += 2 * EVALS_PER_PANEL;
    }
}

/// Convenience wrapper returning only the value of `∫_lo^hi f` with relative
/// tolerance `tol`. `lo > hi` integrates with the sign flipped.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return adaptive_quadrature(f, hi, lo, tol).map(|v| -v);
    }
    integrate(f, lo, hi, QuadOptions::relative(tol)).map(|r| r.value)
}
