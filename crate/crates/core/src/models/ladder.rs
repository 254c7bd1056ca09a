//! Truncated bosonic ladder operators and tensor-product embedding.
//!
//! A mode keeps occupations `0..n_max`; matrix elements that would leave the
//! truncated space are dropped.

use num_complex::Complex64;

use crate::linalg::{kron_all, ComplexMatrix};
use crate::{Error, Result};

/// `b` with `b|n⟩ = √n |n-1⟩`.
pub fn annihilation(n_max: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n_max, n_max, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn creation(n_max: usize) -> ComplexMatrix {
    annihilation(n_max).adjoint()
}

pub fn number(n_max: usize) -> ComplexMatrix {
    let d: Vec<f64> = (0..n_max).map(|n| n as f64).collect();
    ComplexMatrix::from_real_diagonal(&d)
}

/// `(-1)^{b†b}`
pub fn parity(n_max: usize) -> ComplexMatrix {
    let d: Vec<f64> = (0..n_max).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    ComplexMatrix::from_real_diagonal(&d)
}

/// Places single-factor operators on the listed tensor factors (factor 0 most
/// significant) and fills the rest with identities.
pub fn embed(ops: &[(usize, &ComplexMatrix)], dims: &[usize], max_dim: usize) -> Result<ComplexMatrix> {
    let identities: Vec<ComplexMatrix> = dims.iter().map(|&d| ComplexMatrix::identity(d)).collect();
    let mut factors: Vec<&ComplexMatrix> = identities.iter().collect();
    for &(site, op) in ops {
        if site >= dims.len() {
            return Err(Error::invalid("site", format!("{site} out of range for {} factors", dims.len())));
        }
        if op.rows() != dims[site] || op.cols() != dims[site] {
            return Err(Error::DimensionMismatch {
                expected: dims[site],
                found: op.rows(),
            });
        }
        factors[site] = op;
    }
    kron_all(factors, max_dim)
}

/// `Π dims`, or a capacity error if it overflows `max_dim`.
pub fn product_dim(dims: &[usize], max_dim: usize) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        total = match total.checked_mul(d) {
            Some(t) if t <= max_dim => t,
            _ => {
                return Err(Error::Capacity {
                    requested: total.saturating_mul(d),
                    max: max_dim,
                })
            }
        };
    }
    Ok(total)
}
