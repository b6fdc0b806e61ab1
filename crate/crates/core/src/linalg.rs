//! Hermitian eigendecompositions, operator norms and matrix functions.
//!
//! All Hermitian spectral factorizations run through nalgebra's
//! `SymmetricEigen`; everything downstream works with the sorted eigendata
//! returned here.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Sorted eigendecomposition of a Hermitian matrix: a = u diag(λ) u*.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in non-decreasing order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the corresponding eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized
/// internally to wash out rounding noise; callers are expected to pass
/// matrices that are Hermitian up to tolerance.
pub fn eigh(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: format!("eigh on {}x{}", a.rows(), a.cols()),
        });
    }
    let h = a.hermitian_part();
    let se = to_na(&h).symmetric_eigen();
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

impl HermitianEigen {
    /// Reassemble u f(diag) u* for a real spectral function.
    pub fn apply_real_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        self.apply_cplx_fn(|x| C64::new(f(x), 0.0))
    }

    /// Reassemble u f(diag) u* for a complex spectral function.
    pub fn apply_cplx_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let u = &self.eigenvectors;
        let mut scaled = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let fj = f(self.eigenvalues[j]);
            for i in 0..n {
                scaled[(i, j)] = u[(i, j)] * fj;
            }
        }
        &scaled * &u.conj_transpose()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

/// Unitary Q factor of a QR factorization; used to draw random unitaries.
pub fn qr_unitary(a: &ComplexMatrix) -> ComplexMatrix {
    let qr = to_na(a).qr();
    let q = qr.q();
    ComplexMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)])
}

/// Operator (spectral) norm via the top eigenvalue of a*a.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    let gram = &a.conj_transpose() * a;
    match eigh(&gram) {
        Ok(e) => e.max_eigenvalue().max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}

/// Trace norm (sum of singular values) of a square matrix.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    let gram = &a.conj_transpose() * a;
    match eigh(&gram) {
        Ok(e) => e.eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).sum(),
        Err(_) => f64::NAN,
    }
}

/// Spectral truncation onto the positive semidefinite cone (eigenvalue
/// clipping of the Hermitian part). Exact projection in the Frobenius metric.
pub fn psd_truncate(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eigh(a)?.apply_real_fn(|x| x.max(0.0)))
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eig(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(a)?.min_eigenvalue())
}

/// Hermitian matrix exponential exp(s·a).
pub fn herm_exp(a: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    Ok(eigh(a)?.apply_real_fn(|x| (s * x).exp()))
}

/// Solve (shift·I + a)⁻¹ for Hermitian PSD `a` through its eigenbasis.
pub fn herm_shifted_inverse(a: &ComplexMatrix, shift: f64) -> Result<ComplexMatrix> {
    let e = eigh(a)?;
    let cond = (shift + e.max_eigenvalue().max(0.0)) / (shift + e.min_eigenvalue().max(0.0));
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::SingularSystem { cond });
    }
    Ok(e.apply_real_fn(|x| 1.0 / (shift + x)))
}
