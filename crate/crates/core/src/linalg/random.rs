//! Seeded random operators for tests, validation suites and benchmarks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, Hermitian, Unitary};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex(r: &mut impl Rng) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| gaussian_complex(r))
}

/// GUE-like Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian(r: &mut impl Rng, n: usize) -> Hermitian {
    Hermitian::symmetrize(&ginibre(r, n)).expect("square finite matrix")
}

/// Unitary from Gram-Schmidt orthonormalization of a Ginibre matrix.
pub fn random_unitary(r: &mut impl Rng, n: usize) -> Unitary {
    let g = ginibre(r, n);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let proj = super::inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = super::norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    Unitary::from_trusted(ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]))
}

/// Normalized random state vector.
pub fn random_state(r: &mut impl Rng, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(r)).collect();
    let norm = super::norm_sqr(&v).sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}
