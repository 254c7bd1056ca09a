use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Products whose flop count exceeds this go through four real GEMMs, which
/// is several times faster than nalgebra's generic complex kernel.
const SPLIT_GEMM_WORK: usize = 24 * 24 * 24;

/// Dense complex matrix. Indexing is `(row, column)`; logical order is
/// row-major regardless of the backing storage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Complex64>>", into = "Vec<Vec<Complex64>>")]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl TryFrom<Vec<Vec<Complex64>>> for ComplexMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Contract("ragged matrix rows".into()));
        }
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        Self::from_row_slice(n, m, &flat)
    }
}

impl From<ComplexMatrix> for Vec<Vec<Complex64>> {
    fn from(m: ComplexMatrix) -> Self {
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Contract("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        let m = Self(DMatrix::from_row_slice(rows, cols, entries));
        if !m.is_finite() {
            return Err(Error::Contract("matrix has non-finite entries".into()));
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let flat: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_row_slice(n, m, &flat)
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|u⟩⟨v|`
    pub fn outer_product(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: rhs.rows(),
            });
        }
        Ok(self.matmul(rhs))
    }

    /// Matrix product. Panics on inner-dimension mismatch; use
    /// [`try_matmul`](Self::try_matmul) for a checked variant.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols(), rhs.rows(), "matmul inner dimension mismatch");
        if self.rows() * self.cols() * rhs.cols() < SPLIT_GEMM_WORK {
            return Self(&self.0 * &rhs.0);
        }
        let ar = self.0.map(|z| z.re);
        let ai = self.0.map(|z| z.im);
        let br = rhs.0.map(|z| z.re);
        let bi = rhs.0.map(|z| z.im);
        let mut re = &ar * &br;
        re.gemm(-1.0, &ai, &bi, 1.0);
        let mut im = &ar * &bi;
        im.gemm(1.0, &ai, &br, 1.0);
        Self(re.zip_map(&im, Complex64::new))
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols(), v.len(), "matvec dimension mismatch");
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`; `self` is the more significant factor.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kronecker(&rhs.0))
    }

    /// `[self, rhs] = self·rhs - rhs·self`
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// `(M + M†) / 2`
    pub fn symmetrized(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `max|M - M†|`
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows() {
            for j in i..self.cols() {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max|M†M - I|`
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().matmul(self);
        let mut worst: f64 = 0.0;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g.0[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Kronecker product with a capacity check on the resulting dimension.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= max_dim && c <= max_dim => Ok(a.kron(b)),
        (r, c) => Err(Error::Capacity {
            requested: r.unwrap_or(usize::MAX).max(c.unwrap_or(usize::MAX)),
            max: max_dim,
        }),
    }
}

/// Kronecker product of a list of factors, first factor most significant.
pub fn kron_all<'a>(
    factors: impl IntoIterator<Item = &'a ComplexMatrix>,
    max_dim: usize,
) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(1);
    for f in factors {
        acc = kron(&acc, f, max_dim)?;
    }
    Ok(acc)
}

/// Weighted sum `Σ w_i M_i`, reduced pairwise in input order so the result
/// does not depend on how the terms were produced.
pub fn weighted_sum(terms: &[(f64, &ComplexMatrix)]) -> Option<ComplexMatrix> {
    let scaled: Vec<ComplexMatrix> = terms.iter().map(|(w, m)| m.scale_real(*w)).collect();
    crate::parallel::pairwise_sum(scaled, |a, b| a + b)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn split_gemm_matches_naive() {
        let n = 40;
        let a = ComplexMatrix::from_fn(n, n, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let b = ComplexMatrix::from_fn(n, n, |i, j| c(((i + 2 * j) % 7) as f64, 0.3 * j as f64));
        let fast = a.matmul(&b);
        let naive = ComplexMatrix::from_fn(n, n, |i, k| (0..n).map(|j| a[(i, j)] * b[(j, k)]).sum());
        assert!(fast.max_abs_diff(&naive) < 1e-10);
    }

    #[test]
    fn row_slice_rejects_nan() {
        let e = ComplexMatrix::from_row_slice(1, 1, &[c(f64::NAN, 0.0)]);
        assert!(matches!(e, Err(Error::Contract(_))));
        let e = ComplexMatrix::from_row_slice(2, 2, &[ONE; 3]);
        assert!(matches!(e, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kron_capacity() {
        let a = ComplexMatrix::identity(64);
        assert!(matches!(kron(&a, &a, 4096), Ok(_)));
        assert!(matches!(kron(&a, &ComplexMatrix::identity(65), 4096), Err(Error::Capacity { .. })));
    }

    #[test]
    fn trace_norms_outer() {
        let m = ComplexMatrix::from_real_diagonal(&[3.0, -4.0]);
        assert_eq!(m.trace(), c(-1.0, 0.0));
        assert!((m.frobenius_norm() - 5.0).abs() < 1e-15);
        assert_eq!(m.max_abs(), 4.0);
        let p = ComplexMatrix::outer_product(&[ONE, ZERO], &[ZERO, I]);
        assert_eq!(p[(0, 1)], -I);
        assert_eq!(p[(1, 0)], ZERO);
    }

    #[test]
    fn weighted_sum_order() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let s = weighted_sum(&[(0.25, &a), (0.75, &b)]).unwrap();
        assert!((s[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s[(1, 1)] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!(weighted_sum(&[]).is_none());
    }
}
