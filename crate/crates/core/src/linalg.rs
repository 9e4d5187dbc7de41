//! Small dense solves with conditioning guards.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

/// Largest accepted condition estimate for any solve feeding the controller.
pub const COND_CAP: f64 = 1e12;

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Outcome of factoring a symmetric matrix that is expected to be SPD.
#[derive(Debug)]
pub enum SpdFailure {
    NotPositive(Vec<f64>),
    IllConditioned(f64),
}

/// Cholesky factor of an SPD matrix whose spectral condition number has
/// been checked against [`COND_CAP`].
#[derive(Debug, Clone)]
pub struct SpdFactor {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    cond: f64,
}

impl SpdFactor {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, SpdFailure> {
        let eig = SymmetricEigen::new(matrix.clone()).eigenvalues;
        let lo = eig.min();
        let hi = eig.max();
        if !(lo > 0.0) {
            return Err(SpdFailure::NotPositive(eig.iter().copied().collect()));
        }
        let cond = hi / lo;
        if cond > COND_CAP {
            return Err(SpdFailure::IllConditioned(cond));
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| SpdFailure::NotPositive(eig.iter().copied().collect()))?;
        Ok(Self { matrix, chol, cond })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// 2-norm condition number of a square matrix; infinite when singular.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Direct solve by LU with partial pivoting.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().lu().solve(b)
}

/// Minimum-norm least-squares solve through the SVD.
pub fn lstsq_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let hi = svd.singular_values.max();
    svd.solve(b, hi * f64::EPSILON * a.nrows().max(a.ncols()) as f64).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_factor_rejects_indefinite_and_ill_conditioned() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(SpdFactor::new(a), Err(SpdFailure::NotPositive(_))));
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-13]);
        assert!(matches!(SpdFactor::new(a), Err(SpdFailure::IllConditioned(_))));
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let f = SpdFactor::new(a.clone()).unwrap();
        let x = f.solve(&DVector::from_vec(vec![1.0, 2.0]));
        assert!((&a * x - DVector::from_vec(vec![1.0, 2.0])).amax() < 1e-14);
    }

    #[test]
    fn condition_of_singular_matrix_is_infinite() {
        assert_eq!(condition_number(&DMatrix::zeros(1, 1)), f64::INFINITY);
        assert_eq!(condition_number(&DMatrix::from_element(1, 1, 0.5)), 1.0);
    }

    #[test]
    fn lu_and_lstsq_agree() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, -1.0, 4.0]);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let x = lu_solve(&a, &b).unwrap();
        let y = lstsq_solve(&a, &b).unwrap();
        assert!((x - y).amax() < 1e-14);
    }
}
