use serde::{Deserialize, Serialize};

use super::ladder::{annihilation, creation, embed, number, product_dim};
use crate::linalg::{ComplexMatrix, Hermitian};
use crate::paulis;
use crate::{Error, Result, Tolerances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BosonMode {
    pub frequency: f64,
    pub coupling: f64,
}

/// One spin coupled through `σᶻ` to a set of truncated harmonic modes.
/// The spin is the most significant tensor factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinBosonSpec {
    pub field: f64,
    #[serde(default)]
    pub modes: Vec<BosonMode>,
    pub n_max: usize,
}

impl SpinBosonSpec {
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(2).chain(self.modes.iter().map(|_| self.n_max)).collect()
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if !self.field.is_finite() {
            return Err(Error::invalid("model.field", "must be finite"));
        }
        for m in &self.modes {
            if !(m.frequency > 0.0 && m.frequency.is_finite()) {
                return Err(Error::invalid("model.modes.frequency", "must be positive and finite"));
            }
            if !m.coupling.is_finite() {
                return Err(Error::invalid("model.modes.coupling", "must be finite"));
            }
        }
        if !self.modes.is_empty() && self.n_max < 2 {
            return Err(Error::invalid("model.n_max", "must be at least 2"));
        }
        product_dim(&self.dims(), tol.max_dim)?;
        Ok(())
    }
}

/// A spin operator on the full (spin ⊗ modes) space.
pub fn spin_operator(spec: &SpinBosonSpec, op: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    embed(&[(0, op)], &spec.dims(), tol.max_dim)
}

/// `b_α` on the full space.
pub fn mode_annihilation(spec: &SpinBosonSpec, alpha: usize, tol: &Tolerances) -> Result<ComplexMatrix> {
    embed(&[(alpha + 1, &annihilation(spec.n_max))], &spec.dims(), tol.max_dim)
}

/// `B σˣ + σᶻ Σ λ_α (b_α + b_α†) + Σ ω_α b_α† b_α`
pub fn build_spinboson_hamiltonian(spec: &SpinBosonSpec, tol: &Tolerances) -> Result<Hermitian> {
    spec.validate(tol)?;
    let dims = spec.dims();
    let mut h = spin_operator(spec, &paulis::x(), tol)?.scale_real(spec.field);
    let z = paulis::z();
    let displacement = &annihilation(spec.n_max) + &creation(spec.n_max);
    let n = number(spec.n_max);
    for (alpha, mode) in spec.modes.iter().enumerate() {
        let coupling = embed(&[(0, &z), (alpha + 1, &displacement)], &dims, tol.max_dim)?;
        let energy = embed(&[(alpha + 1, &n)], &dims, tol.max_dim)?;
        h = &h + &(&coupling.scale_real(mode.coupling) + &energy.scale_real(mode.frequency));
    }
    Ok(Hermitian::from_trusted(h.symmetrized()))
}

/// `σˣ ⊗ Π_α (-1)^{b_α†b_α}`, conserved for any field.
pub fn parity_operator(spec: &SpinBosonSpec, tol: &Tolerances) -> Result<ComplexMatrix> {
    let p = super::ladder::parity(spec.n_max);
    let x = paulis::x();
    let mut ops: Vec<(usize, &ComplexMatrix)> = vec![(0, &x)];
    for alpha in 0..spec.modes.len() {
        ops.push((alpha + 1, &p));
    }
    embed(&ops, &spec.dims(), tol.max_dim)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    fn one_mode(field: f64, lambda: f64, n_max: usize) -> SpinBosonSpec {
        SpinBosonSpec {
            field,
            modes: vec![BosonMode { frequency: 1.0, coupling: lambda }],
            n_max,
        }
    }

    #[test]
    fn no_modes_is_field_term() {
        let spec = SpinBosonSpec { field: 0.7, modes: vec![], n_max: 4 };
        let h = build_spinboson_hamiltonian(&spec, &Tolerances::default()).unwrap();
        assert!(h.matrix().max_abs_diff(&paulis::x().scale_real(0.7)) < 1e-15);
    }

    #[test]
    fn zero_field_is_displaced_oscillators() {
        let tol = Tolerances::default();
        let (lambda, omega) = (0.3, 1.0);
        let e = eigh(&build_spinboson_hamiltonian(&one_mode(0.0, lambda, 12), &tol).unwrap(), &tol)
            .unwrap()
            .eigenvalues;
        for n in 0..5 {
            let want = n as f64 * omega - lambda * lambda / omega;
            assert!((e[2 * n] - want).abs() < 1e-6, "{} vs {want}", e[2 * n]);
            assert!((e[2 * n + 1] - want).abs() < 1e-6);
        }
    }

    #[test]
    fn finite_field_converges_to_large_truncation() {
        let tol = Tolerances::default();
        let reference = eigh(&build_spinboson_hamiltonian(&one_mode(0.2, 0.3, 20), &tol).unwrap(), &tol)
            .unwrap()
            .eigenvalues;
        let e = eigh(&build_spinboson_hamiltonian(&one_mode(0.2, 0.3, 12), &tol).unwrap(), &tol)
            .unwrap()
            .eigenvalues;
        for u in 0..6 {
            assert!((e[u] - reference[u]).abs() < 1e-6);
        }
    }

    #[test]
    fn parity_is_conserved() {
        let tol = Tolerances::default();
        let spec = SpinBosonSpec {
            field: 0.37,
            modes: vec![
                BosonMode { frequency: 1.0, coupling: 0.3 },
                BosonMode { frequency: 1.7, coupling: -0.2 },
            ],
            n_max: 5,
        };
        let h = build_spinboson_hamiltonian(&spec, &tol).unwrap();
        let p = parity_operator(&spec, &tol).unwrap();
        assert!(h.matrix().commutator(&p).max_abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_modes() {
        let tol = Tolerances::default();
        let mut s = one_mode(0.1, 0.1, 4);
        s.modes[0].frequency = 0.0;
        assert!(s.validate(&tol).is_err());
        let big = SpinBosonSpec {
            field: 0.0,
            modes: vec![BosonMode { frequency: 1.0, coupling: 0.0 }; 3],
            n_max: 13,
        };
        assert!(matches!(big.validate(&tol), Err(Error::Capacity { .. })));
    }
}
