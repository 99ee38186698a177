use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivots with `|p| ≤ PIVOT_REL_TOL · (max |a_ij| in the pivot's original row)`
/// are treated as zero.
pub const PIVOT_REL_TOL: f64 = 1e-14;

/// Row-pivoted LU factorization `PA = LU`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let scale: Vec<f64> = (0..n).map(|i| a.row(i).amax()).collect();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (mut p, mut best) = (k, lu[(k, k)].abs());
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if !(best > PIVOT_REL_TOL * scale[perm[p]]) {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot: lu[(p, k)],
                });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= l * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut x = DVector::from_iterator(n, self.perm.iter().map(|&i| b[i]));
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }
}

/// Solves `Ax = b` with a one-off factorization.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    LuFactor::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_permutation() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        assert_eq!(lu_solve(&DMatrix::identity(3, 3), &b).unwrap(), b);
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        // P x = b  ⇒  x = Pᵀ b
        let x = lu_solve(&p, &b).unwrap();
        assert_eq!(x, DVector::from_vec(vec![3.5, 1.0, -2.0]));
    }

    #[test]
    fn random_well_conditioned_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut a = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
            for i in 0..5 {
                a[(i, i)] += 5.0;
            }
            let b = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
            let f = LuFactor::new(&a).unwrap();
            for rhs in [b.clone(), 2.0 * &b] {
                let x = f.solve(&rhs).unwrap();
                assert!((&a * &x - &rhs).amax() <= 1e-10 * rhs.amax());
            }
        }
    }

    #[test]
    fn singular_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(LuFactor::new(&a), Err(Error::SingularMatrix { column: 1, .. })));
        let z = DMatrix::<f64>::zeros(2, 2);
        assert!(matches!(LuFactor::new(&z), Err(Error::SingularMatrix { column: 0, .. })));
        let r = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(LuFactor::new(&r), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn scaled_rows_are_not_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1e-20, 0.0, 0.0, 1e20]);
        let x = lu_solve(&a, &DVector::from_vec(vec![1e-20, 1e20])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }
}
