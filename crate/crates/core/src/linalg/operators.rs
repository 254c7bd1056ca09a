use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, ZERO};
use crate::{Error, Result, Tolerances};

/// A square matrix that is Hermitian to within the policy tolerance.
/// Units are energy with ħ = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct Hermitian(ComplexMatrix);

impl TryFrom<ComplexMatrix> for Hermitian {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Hermitian::new(m, &Tolerances::default())
    }
}

impl From<Hermitian> for ComplexMatrix {
    fn from(h: Hermitian) -> Self {
        h.0
    }
}

impl Hermitian {
    /// Validates `m` against `max|M - M†| <= hermitian_rel * max|M|`.
    pub fn new(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        check_square_finite(&m)?;
        let defect = m.hermiticity_defect();
        let scale = m.max_abs();
        if defect > tol.hermitian_rel * scale {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian: max|M - M†| = {defect:e} (max|M| = {scale:e})"
            )));
        }
        Ok(Self(m))
    }

    /// Projects an arbitrary square matrix onto its Hermitian part `(M + M†)/2`.
    pub fn symmetrize(m: &ComplexMatrix) -> Result<Self> {
        check_square_finite(m)?;
        Ok(Self(m.symmetrized()))
    }

    /// For matrices that are Hermitian by construction.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn plus(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &other.0)
    }

    pub fn minus(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &other.0)
    }

    pub fn scale(&self, c: f64) -> Hermitian {
        Hermitian(self.0.scale_real(c))
    }
}

/// A square matrix with `max|U†U - I|` within the policy tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary(ComplexMatrix);

impl Unitary {
    pub fn new(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        check_square_finite(&m)?;
        let defect = m.unitarity_defect();
        if defect > tol.unitary {
            return Err(Error::Contract(format!(
                "matrix is not unitary: max|U†U - I| = {defect:e} > {:e}",
                tol.unitary
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    /// Diagonal unitary `diag(e^{iθ_k})`.
    pub fn from_phases(theta: &[f64]) -> Self {
        let d: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        Self(ComplexMatrix::from_diagonal(&d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary(self.0.adjoint())
    }

    /// `self · rhs`
    pub fn then_apply(&self, rhs: &Unitary) -> Result<Unitary> {
        Ok(Unitary(self.0.try_matmul(&rhs.0)?))
    }

    pub fn kron(&self, rhs: &Unitary) -> Unitary {
        Unitary(self.0.kron(&rhs.0))
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.0.matvec(v)
    }
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
/// Column `u` of `eigenvectors` belongs to `eigenvalues[u]`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Unitary,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, u: usize) -> Vec<Complex64> {
        self.eigenvectors.matrix().column(u)
    }

    /// `max|E_u|`, the spectral norm of the decomposed operator.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// `E_max - E_min`, the largest transition frequency.
    pub fn spread(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// `V† M V`: the matrix elements `⟨u|M|v⟩` in this eigenbasis.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = self.eigenvectors.matrix();
        v.adjoint().matmul(&m.matmul(v))
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = self.eigenvectors.matrix();
        let n = self.dim();
        let mut scaled = v.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let fj = f(e);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled.matmul(&v.adjoint())
    }

    /// `V Λ V†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|e| Complex64::new(e, 0.0))
    }

    /// Largest `|H v_u - E_u v_u|₂` over all eigenpairs.
    pub fn max_residual(&self, h: &Hermitian) -> f64 {
        let v = self.eigenvectors.matrix();
        let hv = h.matrix().matmul(v);
        (0..self.dim())
            .map(|u| {
                let e = self.eigenvalues[u];
                (0..self.dim())
                    .map(|i| (hv[(i, u)] - v[(i, u)] * e).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Groups eigenvalue indices whose consecutive gaps are at most `tol`.
    pub fn degenerate_blocks(&self, tol: f64) -> Vec<std::ops::Range<usize>> {
        let mut blocks = Vec::new();
        let mut start = 0;
        for u in 1..=self.dim() {
            if u == self.dim() || self.eigenvalues[u] - self.eigenvalues[u - 1] > tol {
                blocks.push(start..u);
                start = u;
            }
        }
        blocks
    }
}

fn check_square_finite(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Contract(format!(
            "operator must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::Contract("operator has non-finite entries".into()));
    }
    Ok(())
}

/// `|ψ|²`
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨a|b⟩`
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).fold(ZERO, |s, t| s + t)
}
