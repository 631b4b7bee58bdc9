//! Dense Hermitian eigensolves and a complex conjugate-gradient solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), 1e-15, 0).ok_or(Error::EigenSolveFailed { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: CVector,
    /// `‖b − Ax‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate gradient for a Hermitian positive (semi)definite operator,
/// started from zero.
pub fn conjugate_gradient<F>(apply: F, rhs: &CVector, tol: f64, max_iter: usize) -> CgOutcome
where
    F: Fn(&CVector) -> CVector,
{
    let n = rhs.len();
    let b_norm = rhs.norm();
    let mut x = CVector::zeros(n);
    if b_norm == 0.0 {
        return CgOutcome { solution: x, relative_residual: 0.0, iterations: 0, converged: true };
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut iterations = 0;
    while iterations < max_iter && rr.sqrt() > tol * b_norm {
        let ap = apply(&p);
        let pap = p.dotc(&ap).re;
        if pap <= 0.0 {
            break;
        }
        let step = rr / pap;
        x.axpy(Complex64::new(step, 0.0), &p, Complex64::new(1.0, 0.0));
        r.axpy(Complex64::new(-step, 0.0), &ap, Complex64::new(1.0, 0.0));
        let rr_next = r.norm_squared();
        let beta = rr_next / rr;
        p = &r + &p * Complex64::new(beta, 0.0);
        rr = rr_next;
        iterations += 1;
    }
    // recurrence drift: report the true residual
    let true_res = (rhs - apply(&x)).norm() / b_norm;
    CgOutcome { solution: x, relative_residual: true_res, iterations, converged: true_res <= tol }
}
