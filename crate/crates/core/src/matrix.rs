//! Dense complex matrices used as the single operator representation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LabError, Result};

/// A dense `rows × cols` complex matrix with finite entries.
///
/// Storage is delegated to `nalgebra`; construction and serialization use
/// row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LabError::invalid("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(LabError::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::invalid("matrix entries must be finite"));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Real matrix from nested rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self(DMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex64::ZERO }))
    }

    /// The rank-one map `z ↦ ⟨z, y⟩ x`, i.e. the matrix `x·y*`.
    pub fn outer(x: &[Complex64], y: &[Complex64]) -> Self {
        Self(DMatrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj()))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub(crate) fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub(crate) fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.diagonal().iter().sum()
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = self.shape();
        let (r2, c2) = other.shape();
        let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
        m.view_mut((0, 0), (r1, c1)).copy_from(&self.0);
        m.view_mut((r1, c1), (r2, c2)).copy_from(&other.0);
        Self(m)
    }

    /// Relative Frobenius distance `‖A−B‖ / max(1, ‖A‖, ‖B‖)`.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in relative_distance");
        let diff = (self - other).frobenius_norm();
        diff / 1f64.max(self.frobenius_norm()).max(other.frobenius_norm())
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(LabError::NotSquare { op, rows: self.rows(), cols: self.cols() })
        }
    }

    pub(crate) fn require_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(LabError::invalid("matrix entries must be finite"))
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Shorthand for a complex scalar.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Standard basis vector `e_k` (1-based, matching the usual notation) in `C^dim`.
pub fn basis_vector(dim: usize, k: usize) -> Vec<Complex64> {
    assert!(k >= 1 && k <= dim, "basis index out of range");
    let mut v = vec![Complex64::ZERO; dim];
    v[k - 1] = Complex64::ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths_and_nan() {
        assert!(ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        let mut v = vec![c(1.0, 0.0); 4];
        v[2] = c(f64::NAN, 0.0);
        assert!(ComplexMatrix::from_row_major(2, 2, v).is_err());
        assert!(ComplexMatrix::from_row_major(0, 2, vec![]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let v: Vec<_> = (0..6).map(|k| c(k as f64, -(k as f64))).collect();
        let m = ComplexMatrix::from_row_major(2, 3, v.clone()).unwrap();
        assert_eq!(m.get(0, 2), c(2.0, -2.0));
        assert_eq!(m.to_row_major(), v);
    }

    #[test]
    fn outer_follows_tensor_convention() {
        // (x⊗y)z = <z,y> x
        let x = vec![c(1.0, 1.0), c(0.0, 2.0)];
        let y = vec![c(0.0, 1.0), c(3.0, 0.0)];
        let t = ComplexMatrix::outer(&x, &y);
        let z = [c(2.0, 0.0), c(1.0, -1.0)];
        let inner: Complex64 = z.iter().zip(&y).map(|(zi, yi)| zi * yi.conj()).sum();
        for i in 0..2 {
            let lhs: Complex64 = (0..2).map(|j| t.get(i, j) * z[j]).sum();
            assert!((lhs - inner * x[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn direct_sum_layout() {
        let a = ComplexMatrix::identity(1);
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let s = a.direct_sum(&b);
        assert_eq!(s.shape(), (3, 3));
        assert_eq!(s.get(0, 0), c(1.0, 0.0));
        assert_eq!(s.get(0, 1), Complex64::ZERO);
        assert_eq!(s.get(2, 1), c(3.0, 0.0));
    }
}
