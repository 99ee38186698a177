//! Computational order of convergence from true error norms.

use crate::error::{Error, Result};

/// Errors at or below this are treated as saturated: `10·ε^0.9`.
pub fn saturation_floor() -> f64 {
    10.0 * f64::EPSILON.powf(0.9)
}

/// `ln(e_{t+1}/e_t) / ln(e_t/e_{t−1})` for every consecutive triple whose
/// members all exceed `floor`.
pub fn coc_from_errors(errors: &[f64], floor: f64) -> Result<Vec<f64>> {
    let ok = |e: f64| e.is_finite() && e > floor;
    let estimates: Vec<f64> = errors
        .windows(3)
        .filter(|w| w.iter().all(|e| ok(*e)) && w[1] != w[0])
        .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
        .collect();
    if estimates.is_empty() {
        return Err(Error::InsufficientData(format!(
            "need three consecutive errors above {floor:e}, got {errors:?}"
        )));
    }
    Ok(estimates)
}

/// Smallest `K` with `e_{t+1} ≤ K·e_t^order` over every consecutive pair
/// whose members both exceed `floor`; `None` if there is no such pair.
pub fn fit_power_law(errors: &[f64], order: f64, floor: f64) -> Option<f64> {
    errors
        .windows(2)
        .filter(|w| w[0] > floor && w[1] > floor && w[0].is_finite() && w[1].is_finite())
        .map(|w| w[1] / w[0].powf(order))
        .reduce(f64::max)
}
