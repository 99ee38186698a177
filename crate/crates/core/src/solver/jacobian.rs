use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Default forward-difference step: `√ε`.
pub fn default_fd_step() -> f64 {
    f64::EPSILON.sqrt()
}

/// Forward-difference Jacobian; column `j` uses `h_j = fd_step · max(1, |x_j|)`.
pub fn jacobian_fd<F>(residual: F, x: &DVector<f64>, fd_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let g0 = residual(x)?;
    let n = x.len();
    let mut jac = DMatrix::zeros(g0.len(), n);
    let mut xp = x.clone();
    for j in 0..n {
        let h = fd_step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        // the representable step, not the requested one
        let dh = xp[j] - x[j];
        let g = residual(&xp)?;
        jac.set_column(j, &((g - &g0) / dh));
        xp[j] = x[j];
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_map_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-2.0..2.0));
        let x = DVector::from_fn(4, |_, _| rng.random_range(-3.0..3.0));
        let j = jacobian_fd(|v: &DVector<f64>| Ok(&a * v), &x, default_fd_step()).unwrap();
        assert!((j - &a).amax() <= 1e-7 * a.amax());
    }

    #[test]
    fn constant_map_gives_zero() {
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let j = jacobian_fd(|_: &DVector<f64>| Ok(DVector::from_vec(vec![3.0, 4.0])), &x, default_fd_step()).unwrap();
        assert_eq!(j, DMatrix::zeros(2, 2));
    }

    #[test]
    fn square_at_one() {
        let x = DVector::from_vec(vec![1.0]);
        let j = jacobian_fd(|v: &DVector<f64>| Ok(v.map(|t| t * t)), &x, default_fd_step()).unwrap();
        assert!((j[(0, 0)] - 2.0).abs() < 1e-7);
    }
}
