use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, I};
use super::operators::{Hermitian, Spectrum, Unitary};
use crate::{Error, Result, Tolerances};

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// Within a degenerate block the eigenvector basis is whatever the solver
/// returns; callers must not depend on it.
pub fn eigh(h: &Hermitian, tol: &Tolerances) -> Result<Spectrum> {
    let n = h.dim();
    let raw = SymmetricEigen::try_new(h.matrix().as_nalgebra().clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical(format!("Hermitian eigensolver did not converge (dim {n})")))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw.eigenvalues[a].total_cmp(&raw.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| raw.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| raw.eigenvectors[(i, order[j])]);

    let spectrum = Spectrum {
        eigenvalues,
        eigenvectors: Unitary::from_trusted(vectors),
    };
    let residual = spectrum.max_residual(h);
    let bound = tol.eigen_residual * (1.0 + spectrum.norm());
    if !(residual <= bound) {
        return Err(Error::Numerical(format!(
            "eigensolver residual {residual:e} exceeds {bound:e} (dim {n}, |H|₂ = {:e})",
            spectrum.norm()
        )));
    }
    Ok(spectrum)
}

/// `exp(G)` for anti-Hermitian `G`, via the eigendecomposition of `iG`.
pub fn expm_antihermitian(g: &ComplexMatrix, tol: &Tolerances) -> Result<Unitary> {
    if !g.is_square() {
        return Err(Error::Contract("generator must be square".into()));
    }
    let h = g.scale(I);
    let defect = h.hermiticity_defect();
    if defect > tol.hermitian_rel * h.max_abs() {
        return Err(Error::Contract(format!(
            "generator is not anti-Hermitian: max|G + G†| = {defect:e}"
        )));
    }
    // G = -i(iG), so exp(G) = V exp(-iΛ) V†.
    let spectrum = eigh(&Hermitian::from_trusted(h.symmetrized()), tol)?;
    Ok(unitary_exp(&spectrum, 1.0))
}

/// `exp(-iHt)` from an existing decomposition of `H`.
pub fn unitary_exp(spectrum: &Spectrum, t: f64) -> Unitary {
    Unitary::from_trusted(spectrum.apply_function(|e| Complex64::from_polar(1.0, -e * t)))
}

/// `U H U†`, re-symmetrized.
pub fn conjugate(h: &Hermitian, u: &Unitary) -> Result<Hermitian> {
    if h.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: u.dim(),
        });
    }
    let m = u.matrix().matmul(&h.matrix().matmul(&u.matrix().adjoint()));
    Ok(Hermitian::from_trusted(m.symmetrized()))
}

/// Largest singular value, from the eigenvalues of `M†M`.
pub fn spectral_norm(m: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let gram = Hermitian::from_trusted(m.adjoint().matmul(m).symmetrized());
    let s = eigh(&gram, tol)?;
    Ok(s.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}
