//! Spectral estimation for Hamiltonians dressed by static classical noise.
//!
//! A noise realization `a` acts on a bare Hamiltonian `H` through a unitary
//! dressing `V_a`, giving `H_a = V_a H V_a†`. The crate builds the model
//! Hamiltonians ([`models`]), the dressings and their weak-noise expansions
//! ([`dressing`]), evolves channel-averaged density matrices ([`evolution`]),
//! and reads spectra back out through free-induction-decay signals ([`fid`])
//! and generalized phase estimation ([`qpe`]).

pub mod dressing;
mod error;
pub mod evolution;
pub mod fid;
pub mod linalg;
pub mod models;
pub mod parallel;
pub mod qpe;
mod tolerance;

pub use error::{Error, Result};
pub use linalg::paulis;
pub use parallel::Execution;
pub use tolerance::Tolerances;

#[cfg(test)]
pub(crate) mod testing {
    pub use crate::linalg::random::*;
}
