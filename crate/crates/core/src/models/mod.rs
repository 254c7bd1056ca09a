//! Model Hamiltonians on explicit finite bases.
//!
//! Basis convention everywhere: tensor factor 0 (qubit 0, site 0, the spin in
//! the spin-boson model) is the most significant.

pub mod bcs;
pub mod fermion;
pub mod ladder;
pub mod oscillator;
pub mod spin;
pub mod spin_boson;

use serde::{Deserialize, Serialize};

pub use bcs::{build_bcs_hamiltonian, BcsSpec, Interaction};
pub use fermion::{fermion_operator, FermionAlgebra, FermionKind, SpinLabel};
pub use oscillator::{build_oscillator_hamiltonian, OscillatorSpec};
pub use spin::{build_spin_hamiltonian, CostTerm, Coupling, SpinModelSpec};
pub use spin_boson::{build_spinboson_hamiltonian, BosonMode, SpinBosonSpec};

use crate::linalg::Hermitian;
use crate::{Result, Tolerances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Spin(SpinModelSpec),
    Oscillator(OscillatorSpec),
    SpinBoson(SpinBosonSpec),
    Bcs(BcsSpec),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Spin(_) => "spin",
            ModelSpec::Oscillator(_) => "oscillator",
            ModelSpec::SpinBoson(_) => "spin_boson",
            ModelSpec::Bcs(_) => "bcs",
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        match self {
            ModelSpec::Spin(s) => s.validate(tol),
            ModelSpec::Oscillator(s) => s.validate(tol),
            ModelSpec::SpinBoson(s) => s.validate(tol),
            ModelSpec::Bcs(s) => s.validate(tol),
        }
    }

    /// Hilbert-space dimension; only meaningful for a validated spec.
    pub fn dimension(&self) -> usize {
        match self {
            ModelSpec::Spin(s) => s.dimension(),
            ModelSpec::Oscillator(s) => s.dims().iter().product(),
            ModelSpec::SpinBoson(s) => s.dims().iter().product(),
            ModelSpec::Bcs(s) => s.dimension(),
        }
    }

    /// Whether the basis is a bosonic truncation (spectra exact only for low levels).
    pub fn is_truncated(&self) -> bool {
        matches!(self, ModelSpec::Oscillator(_) | ModelSpec::SpinBoson(_))
    }

    pub fn build_hamiltonian(&self, tol: &Tolerances) -> Result<Hermitian> {
        match self {
            ModelSpec::Spin(s) => build_spin_hamiltonian(s, tol),
            ModelSpec::Oscillator(s) => build_oscillator_hamiltonian(s, tol),
            ModelSpec::SpinBoson(s) => build_spinboson_hamiltonian(s, tol),
            ModelSpec::Bcs(s) => build_bcs_hamiltonian(s, tol),
        }
    }
}
