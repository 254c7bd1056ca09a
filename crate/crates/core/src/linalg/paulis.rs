//! Single-qubit Pauli matrices in the `(|0⟩, |1⟩)` basis, `σᶻ|0⟩ = |0⟩`.

use num_complex::Complex64;

use super::ComplexMatrix;

fn m2(a: [[Complex64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| a[i][j])
}

const O: Complex64 = Complex64::new(0.0, 0.0);
const L: Complex64 = Complex64::new(1.0, 0.0);
const IM: Complex64 = Complex64::new(0.0, 1.0);

pub fn x() -> ComplexMatrix {
    m2([[O, L], [L, O]])
}

pub fn y() -> ComplexMatrix {
    m2([[O, -IM], [IM, O]])
}

pub fn z() -> ComplexMatrix {
    m2([[L, O], [O, -L]])
}

/// `σˣ + iσʸ = 2|0⟩⟨1|`
pub fn raising() -> ComplexMatrix {
    &x() + &y().scale(IM)
}
