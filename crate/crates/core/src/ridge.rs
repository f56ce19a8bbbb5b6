//! Closed-form kernel ridge regression: `c = (K + βI)⁻¹ y`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;

/// Regularization used throughout unless configured otherwise.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;

/// Factor applied to β for the single retry after a failed factorization.
pub const ESCALATION: f64 = 100.0;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    lower: DMatrix<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading only its lower triangle.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let l = &self.lower;
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }
}

/// Coefficients of a fitted kernel ridge regressor plus the cached factor.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSolution {
    pub coefficients: DVector<f64>,
    /// β actually used (differs from `requested` only after an escalation).
    pub regularization: f64,
    pub requested: f64,
    factor: Cholesky,
}

impl RidgeSolution {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn escalated(&self) -> bool {
        self.regularization != self.requested
    }

    /// Solves `(K + βI) x = b` with the cached factor.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b)
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }
}

/// Fits `(K + βI) c = y`. On factorization failure retries once with `β·100`.
pub fn fit(k: &KernelMatrix, y: &DVector<f64>, beta: f64) -> Result<RidgeSolution> {
    fit_matrix(&k.entries, y, beta)
}

pub(crate) fn fit_matrix(k: &DMatrix<f64>, y: &DVector<f64>, beta: f64) -> Result<RidgeSolution> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "regularization must be positive, got {beta}"
        )));
    }
    if k.nrows() != k.ncols() {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            found: k.ncols(),
        });
    }
    if y.len() != k.nrows() {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "ridge targets",
        });
    }
    let shifted = |b: f64| {
        let mut a = k.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += b;
        }
        a
    };
    let (factor, used) = match Cholesky::new(&shifted(beta)) {
        Ok(f) => (f, beta),
        Err(Error::NotPositiveDefinite { pivot }) => {
            let escalated = beta * ESCALATION;
            log::warn!(
                "ridge factorization failed at pivot {pivot} with beta = {beta:e}; retrying with {escalated:e}"
            );
            (Cholesky::new(&shifted(escalated))?, escalated)
        }
        Err(e) => return Err(e),
    };
    Ok(RidgeSolution {
        coefficients: factor.solve(y),
        regularization: used,
        requested: beta,
        factor,
    })
}

/// `K_cross · c`.
pub fn predict(k_cross: &KernelMatrix, solution: &RidgeSolution) -> Result<DVector<f64>> {
    if k_cross.cols() != solution.len() {
        return Err(Error::DimensionMismatch {
            expected: solution.len(),
            found: k_cross.cols(),
        });
    }
    Ok(&k_cross.entries * &solution.coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn km(n: usize, data: &[f64]) -> KernelMatrix {
        KernelMatrix::from_entries(DMatrix::from_row_slice(n, n, data))
    }

    #[test]
    fn scalar_solve() {
        let sol = fit(&km(1, &[3.0]), &DVector::from_vec(vec![2.0]), 1e-6).unwrap();
        assert!((sol.coefficients[0] - 2.0 / (3.0 + 1e-6)).abs() < 1e-15);
        let cross = KernelMatrix::from_entries(DMatrix::from_row_slice(1, 1, &[0.5]));
        let p = predict(&cross, &sol).unwrap();
        assert!((p[0] - 0.5 * 2.0 / (3.0 + 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn identity_kernel() {
        let k = KernelMatrix::from_entries(DMatrix::identity(3, 3));
        let sol = fit(&k, &DVector::from_vec(vec![2.0, 4.0, 6.0]), 1.0).unwrap();
        for (c, e) in sol.coefficients.iter().zip([1.0, 2.0, 3.0]) {
            assert!((c - e).abs() < 1e-14);
        }
        assert!(!sol.escalated());
    }

    #[test]
    fn zero_row_predicts_zero() {
        let k = KernelMatrix::from_entries(DMatrix::identity(2, 2));
        let sol = fit(&k, &DVector::from_vec(vec![1.0, -1.0]), 0.5).unwrap();
        let cross = KernelMatrix::from_entries(DMatrix::zeros(1, 2));
        assert_eq!(predict(&cross, &sol).unwrap()[0], 0.0);
    }

    #[test]
    fn reports_pivot_of_indefinite_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 2.0, 1.0]);
        assert_eq!(
            Cholesky::new(&a),
            Err(Error::NotPositiveDefinite { pivot: 2 })
        );
    }

    #[test]
    fn escalates_beta_once() {
        // eigenvalues 2 and -5e-5: indefinite at β = 1e-6, PD after β·100 = 1e-4
        let e = 5e-5;
        let k = km(
            2,
            &[1.0 - e / 2.0, 1.0 + e / 2.0, 1.0 + e / 2.0, 1.0 - e / 2.0],
        );
        let sol = fit(&k, &DVector::from_vec(vec![1.0, 1.0]), 1e-6).unwrap();
        assert!(sol.escalated());
        assert_eq!(sol.regularization, 1e-6 * ESCALATION);
        // still fails after escalation
        let bad = km(2, &[-1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            fit(&bad, &DVector::from_vec(vec![1.0, 1.0]), 1e-6),
            Err(Error::NotPositiveDefinite { pivot: 0 })
        ));
    }

    #[test]
    fn rejects_bad_shapes() {
        let k = km(2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(fit(&k, &DVector::from_vec(vec![1.0]), 1e-6).is_err());
        assert!(fit(&k, &DVector::from_vec(vec![1.0, 2.0]), 0.0).is_err());
        let sol = fit(&k, &DVector::from_vec(vec![1.0, 2.0]), 1e-6).unwrap();
        let cross = KernelMatrix::from_entries(DMatrix::zeros(1, 3));
        assert!(predict(&cross, &sol).is_err());
    }
}
