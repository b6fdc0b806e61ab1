//! Dense complex matrices with the row-major JSON wire format shared by all
//! tools in this workspace.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// A dense complex matrix, row-major storage.
///
/// Serializes as `{"rows": r, "cols": c, "data": [[re, im], ...]}` with the
/// entries listed row by row. This format is part of the wire contract and is
/// shared by states, Kraus families and L²-operators.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: format!("matrix {}x{} with {} entries", rows, cols, data.len()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix unit E_ij (1 at row i, column j).
    pub fn matrix_unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn from_diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diag(entries: &[f64]) -> Self {
        Self::from_diag(
            &entries
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// Build from a row-major closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert–Schmidt inner product ⟨a, b⟩ = trace(a* b), conjugate-linear in
    /// the first argument.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Frobenius / Hilbert–Schmidt norm.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian part (a + a*)/2.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        let adj = self.conj_transpose();
        (self + &adj).scale_re(0.5)
    }

    /// Deviation from self-adjointness, ‖a − a*‖ (Frobenius).
    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.conj_transpose()).fro_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    /// Kronecker product, row-major convention: (a ⊗ b)[(i1*rb+i2),(j1*cb+j2)] = a[i1,j1] b[i2,j2].
    pub fn kron(&self, other: &Self) -> Self {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        ComplexMatrix::from_fn(ra * rb, ca * cb, |i, j| {
            self[(i / rb, j / cb)] * other[(i % rb, j % cb)]
        })
    }

    /// Row-major vectorization: an r×c matrix becomes a column of length r·c
    /// listing the rows one after another. Part of the wire contract for
    /// L²-operators.
    pub fn vectorize(&self) -> Vec<C64> {
        self.data.clone()
    }

    /// Inverse of [`ComplexMatrix::vectorize`].
    pub fn from_vectorized(rows: usize, cols: usize, v: &[C64]) -> Result<Self> {
        Self::new(rows, cols, v.to_vec())
    }

    /// Extract the (i,j) block of size bs×bs from a square matrix partitioned
    /// into bs-sized blocks.
    pub fn block(&self, bi: usize, bj: usize, bs: usize) -> Self {
        Self::from_fn(bs, bs, |i, j| self[(bi * bs + i, bj * bs + j)])
    }

    /// Assemble a square matrix from k×k blocks of size bs each.
    pub fn from_blocks(k: usize, bs: usize, blocks: &[ComplexMatrix]) -> Self {
        debug_assert_eq!(blocks.len(), k * k);
        Self::from_fn(k * bs, k * bs, |i, j| {
            blocks[(i / bs) * k + (j / bs)][(i % bs, j % bs)]
        })
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in +"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in -"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in *");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixWire {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        let data = wire.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::new(wire.rows, wire.cols, data).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mul_and_adjoint() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(2.0, 0.0)],
        )
        .unwrap();
        let b = ComplexMatrix::identity(2);
        assert_eq!(&a * &b, a);
        let adj = a.conj_transpose();
        assert_eq!(adj[(1, 0)], c(0.0, -1.0));
        assert_eq!(adj[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn hs_inner_matches_trace_formula() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0), c(3.0, 0.0)],
        )
        .unwrap();
        let b = ComplexMatrix::new(
            2,
            2,
            vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let direct = (&a.conj_transpose() * &b).trace();
        let inner = a.hs_inner(&b);
        assert!((direct - inner).norm() < 1e-14);
    }

    #[test]
    fn kron_block_structure() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let e01 = ComplexMatrix::matrix_unit(2, 0, 1);
        let k = a.kron(&e01);
        assert_eq!(k[(0, 1)], c(1.0, 0.0));
        assert_eq!(k[(2, 3)], c(2.0, 0.0));
        assert_eq!(k.fro_norm(), (5.0f64).sqrt());
    }

    #[test]
    fn vectorize_row_major_order() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap();
        let v = a.vectorize();
        assert_eq!(v[1], c(2.0, 0.0));
        assert_eq!(v[2], c(3.0, 0.0));
        let back = ComplexMatrix::from_vectorized(2, 2, &v).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn json_round_trip() {
        let a = ComplexMatrix::new(1, 2, vec![c(1.5, -2.0), c(0.0, 3.25)]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("\"rows\":1"));
        let b: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_non_finite_and_bad_shape() {
        assert!(ComplexMatrix::new(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }
}
