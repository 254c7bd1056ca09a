//! Dense complex linear algebra: matrices, Hermitian and unitary operators,
//! eigendecomposition and unitary exponentials.

mod eigen;
mod matrix;
mod operators;
pub mod paulis;
pub mod random;

pub use eigen::{conjugate, eigh, expm_antihermitian, spectral_norm, unitary_exp};
pub use matrix::{kron, kron_all, weighted_sum, ComplexMatrix};
pub use operators::{inner, norm_sqr, Hermitian, Spectrum, Unitary};

pub(crate) use matrix::I;
