use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, Hermitian};
use crate::{Error, Result, Tolerances};

pub const MAX_QUBITS: usize = 12;

/// A `σᶻσᶻ` (or spring) coupling between sites `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// The `σᶻ`-diagonal cost part of the transverse-field spin Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostTerm {
    /// `Σ h_i σᶻ_i + Σ J_ij σᶻ_i σᶻ_j`
    Ising {
        h: Vec<f64>,
        #[serde(default)]
        couplings: Vec<Coupling>,
    },
    /// `I - |x⟩⟨x|` for a marked computational basis state `x`.
    Grover { index_state: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinModelSpec {
    pub n_qubits: usize,
    /// Transverse field `B`.
    pub field: f64,
    pub cost: CostTerm,
}

impl SpinModelSpec {
    pub fn dimension(&self) -> usize {
        1usize << self.n_qubits.min(usize::BITS as usize - 1)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::invalid("model.n_qubits", "must be at least 1"));
        }
        if n > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: 1usize << n.min(40),
                max: 1 << MAX_QUBITS,
            });
        }
        tol.check_dim(self.dimension())?;
        if !self.field.is_finite() {
            return Err(Error::invalid("model.field", "must be finite"));
        }
        match &self.cost {
            CostTerm::Ising { h, couplings } => {
                if h.len() != n {
                    return Err(Error::invalid(
                        "model.cost.h",
                        format!("expected {n} entries, got {}", h.len()),
                    ));
                }
                if h.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("model.cost.h", "must be finite"));
                }
                validate_couplings(couplings, n, "model.cost.couplings")?;
            }
            CostTerm::Grover { index_state } => {
                if *index_state >= self.dimension() {
                    return Err(Error::invalid(
                        "model.cost.index_state",
                        format!("must be < 2^{n} = {}", self.dimension()),
                    ));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn validate_couplings(couplings: &[Coupling], n: usize, key: &str) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for c in couplings {
        if c.i >= c.j {
            return Err(Error::invalid(key, format!("pair ({}, {}) must satisfy i < j", c.i, c.j)));
        }
        if c.j >= n {
            return Err(Error::invalid(key, format!("site {} out of range (n = {n})", c.j)));
        }
        if !seen.insert((c.i, c.j)) {
            return Err(Error::invalid(key, format!("duplicate pair ({}, {})", c.i, c.j)));
        }
        if !c.value.is_finite() {
            return Err(Error::invalid(key, "values must be finite"));
        }
    }
    Ok(())
}

/// Bit of qubit `q` in basis index `x`; qubit 0 is the most significant.
pub(crate) fn qubit_bit(x: usize, q: usize, n: usize) -> usize {
    (x >> (n - 1 - q)) & 1
}

/// `σᶻ` eigenvalue of qubit `q` in basis state `x`.
pub(crate) fn z_sign(x: usize, q: usize, n: usize) -> f64 {
    1.0 - 2.0 * qubit_bit(x, q, n) as f64
}

/// `B Σσˣ_i + h(σᶻ)`, built directly in the computational basis.
pub fn build_spin_hamiltonian(spec: &SpinModelSpec, tol: &Tolerances) -> Result<Hermitian> {
    spec.validate(tol)?;
    let n = spec.n_qubits;
    let dim = spec.dimension();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        let diag = match &spec.cost {
            CostTerm::Ising { h, couplings } => {
                let single: f64 = (0..n).map(|q| h[q] * z_sign(x, q, n)).sum();
                let pair: f64 = couplings
                    .iter()
                    .map(|c| c.value * z_sign(x, c.i, n) * z_sign(x, c.j, n))
                    .sum();
                single + pair
            }
            CostTerm::Grover { index_state } => {
                if x == *index_state {
                    0.0
                } else {
                    1.0
                }
            }
        };
        m[(x, x)] = Complex64::new(diag, 0.0);
        for q in 0..n {
            let y = x ^ (1 << (n - 1 - q));
            m[(y, x)] += Complex64::new(spec.field, 0.0);
        }
    }
    Ok(Hermitian::from_trusted(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, kron_all};
    use crate::paulis;

    fn ising(n: usize, field: f64, h: Vec<f64>, couplings: Vec<(usize, usize, f64)>) -> SpinModelSpec {
        SpinModelSpec {
            n_qubits: n,
            field,
            cost: CostTerm::Ising {
                h,
                couplings: couplings.into_iter().map(|(i, j, value)| Coupling { i, j, value }).collect(),
            },
        }
    }

    /// Independent assembly through Kronecker products of Pauli matrices.
    fn kron_oracle(spec: &SpinModelSpec) -> ComplexMatrix {
        let n = spec.n_qubits;
        let site = |q: usize, op: &ComplexMatrix| {
            let id = ComplexMatrix::identity(2);
            let fs: Vec<&ComplexMatrix> = (0..n).map(|k| if k == q { op } else { &id }).collect();
            kron_all(fs, 4096).unwrap()
        };
        let dim = 1 << n;
        let mut h = ComplexMatrix::zeros(dim, dim);
        for q in 0..n {
            h = &h + &site(q, &paulis::x()).scale_real(spec.field);
        }
        if let CostTerm::Ising { h: hs, couplings } = &spec.cost {
            for q in 0..n {
                h = &h + &site(q, &paulis::z()).scale_real(hs[q]);
            }
            for c in couplings {
                let zz = site(c.i, &paulis::z()).matmul(&site(c.j, &paulis::z()));
                h = &h + &zz.scale_real(c.value);
            }
        }
        h
    }

    #[test]
    fn single_qubit_is_sigma_x() {
        let h = build_spin_hamiltonian(&ising(1, 1.0, vec![0.0], vec![]), &Tolerances::default()).unwrap();
        assert!(h.matrix().max_abs_diff(&paulis::x()) < 1e-15);
        let s = eigh(&h, &Tolerances::default()).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14 && (s.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn classical_ising_diagonal() {
        let h = build_spin_hamiltonian(&ising(2, 0.0, vec![0.0, 0.0], vec![(0, 1, 1.0)]), &Tolerances::default())
            .unwrap();
        let want = ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]);
        assert!(h.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn matches_kron_assembly() {
        let spec = ising(3, 0.5, vec![0.3, -0.2, 0.1], vec![(0, 1, 0.8), (1, 2, -0.4), (0, 2, 0.25)]);
        let h = build_spin_hamiltonian(&spec, &Tolerances::default()).unwrap();
        assert!(h.matrix().max_abs_diff(&kron_oracle(&spec)) < 1e-14);
    }

    #[test]
    fn two_qubit_spectrum_matches_closed_form_oracle() {
        // n=2, B=0.5, h=(0.3,-0.2), J=0.8: eigenvalues of the 4x4 matrix via
        // the kron oracle and an independent characteristic-polynomial root
        // bracket.
        let spec = ising(2, 0.5, vec![0.3, -0.2], vec![(0, 1, 0.8)]);
        let h = build_spin_hamiltonian(&spec, &Tolerances::default()).unwrap();
        let ours = eigh(&h, &Tolerances::default()).unwrap().eigenvalues;
        let m = kron_oracle(&spec);
        let real: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| m[(i, j)].re).collect()).collect();
        let det = |lam: f64| {
            let mut a = real.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] -= lam;
            }
            det4(&a)
        };
        let mut roots = Vec::new();
        let mut x = -4.0;
        let step = 1e-3;
        while x < 4.0 {
            let (a, b) = (det(x), det(x + step));
            if a == 0.0 || a * b < 0.0 {
                let (mut lo, mut hi) = (x, x + step);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if det(lo) * det(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x += step;
        }
        assert_eq!(roots.len(), 4);
        for (a, b) in ours.iter().zip(&roots) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    fn det4(a: &[Vec<f64>]) -> f64 {
        fn det(m: &[Vec<f64>]) -> f64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|c| {
                    let minor: Vec<Vec<f64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, v)| *v).collect())
                        .collect();
                    let s = if c % 2 == 0 { 1.0 } else { -1.0 };
                    s * m[0][c] * det(&minor)
                })
                .sum()
        }
        det(a)
    }

    #[test]
    fn grover_projector_complement() {
        for n in 1..=4 {
            for marked in 0..(1usize << n) {
                let spec = SpinModelSpec {
                    n_qubits: n,
                    field: 0.0,
                    cost: CostTerm::Grover { index_state: marked },
                };
                let h = build_spin_hamiltonian(&spec, &Tolerances::default()).unwrap();
                for x in 0..(1usize << n) {
                    for y in 0..(1usize << n) {
                        let want = if x == y && x != marked { 1.0 } else { 0.0 };
                        assert_eq!(h.matrix()[(x, y)].re, want);
                    }
                }
            }
        }
    }

    #[test]
    fn validation_errors() {
        let tol = Tolerances::default();
        assert!(matches!(ising(13, 1.0, vec![0.0; 13], vec![]).validate(&tol), Err(Error::Capacity { .. })));
        let bad = ising(2, 1.0, vec![0.0; 2], vec![(1, 0, 1.0)]);
        assert!(matches!(bad.validate(&tol), Err(Error::InvalidParameter { .. })));
        let dup = ising(3, 1.0, vec![0.0; 3], vec![(0, 1, 1.0), (0, 1, 2.0)]);
        assert!(dup.validate(&tol).is_err());
        let short = ising(3, 1.0, vec![0.0; 2], vec![]);
        assert!(short.validate(&tol).is_err());
        let g = SpinModelSpec { n_qubits: 2, field: 1.0, cost: CostTerm::Grover { index_state: 4 } };
        assert!(g.validate(&tol).is_err());
    }
}
