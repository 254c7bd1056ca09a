//! Dressing transformations `H_a = V_a H V_a†` and their weak-noise forms.

mod bcs;
mod channel;
mod ensemble;
mod first_order;
mod unitary;

use serde::{Deserialize, Serialize};

pub use bcs::{
    bcs_generator, bcs_structure, bcs_translation, build_bcs_dressing, mode_rotation, translation_defect, BcsStructure,
};
pub use channel::NoiseChannel;
pub use ensemble::{
    sample_ensemble, ChannelEnsemble, ChannelShape, Distribution, EnsembleDescriptor, Provenance, WeightedChannel,
};
pub use first_order::{dress_closed_form, dress_first_order};
pub use unitary::{build_dressing_unitary, displacement, dress_exact};

use crate::linalg::{spectral_norm, ComplexMatrix, Hermitian, Unitary};
use crate::models::ModelSpec;
use crate::{Execution, Result, Tolerances};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DressingMode {
    #[default]
    Exact,
    FirstOrder,
}

/// One channel of a dressed ensemble. `unitary` is present in exact mode.
#[derive(Clone, Debug)]
pub struct DressedChannel {
    pub weight: f64,
    pub unitary: Option<Unitary>,
    pub hamiltonian: Hermitian,
}

/// Dresses `h` by every channel of `ensemble`, in input order.
pub fn dress_ensemble(
    h: &Hermitian,
    model: Option<&ModelSpec>,
    ensemble: &ChannelEnsemble,
    mode: DressingMode,
    exec: Execution,
    tol: &Tolerances,
) -> Result<Vec<DressedChannel>> {
    exec.try_map(ensemble.entries(), |entry| {
        let c = &entry.channel;
        let (unitary, hamiltonian) = match mode {
            DressingMode::FirstOrder => (None, dress_first_order(h, c, model, tol)?),
            DressingMode::Exact => match (c, model) {
                (NoiseChannel::SpinZ { angles }, Some(ModelSpec::Spin(s))) => {
                    c.check_compatible(model.expect("matched"))?;
                    let phases = unitary::spin_phases(angles, s.n_qubits);
                    let hh = unitary::dress_diagonal(h, &phases)?;
                    (Some(Unitary::from_phases(&phases)), hh)
                }
                _ => {
                    let v = build_dressing_unitary(c, model, tol)?;
                    let hh = dress_exact(h, &v)?;
                    (Some(v), hh)
                }
            },
        };
        Ok(DressedChannel {
            weight: entry.weight,
            unitary,
            hamiltonian,
        })
    })
}

/// Basis indices whose every bosonic occupation is below `cutoff`; spin
/// factors (dimension 2) are always kept.
pub fn low_occupation_indices(model: &ModelSpec, cutoff: usize) -> Vec<usize> {
    let dims = match model {
        ModelSpec::Oscillator(s) => s.dims(),
        ModelSpec::SpinBoson(s) => s.dims(),
        _ => return (0..model.dimension()).collect(),
    };
    let boson = |f: usize| !(matches!(model, ModelSpec::SpinBoson(_)) && f == 0);
    (0..dims.iter().product())
        .filter(|&x| {
            let mut rest = x;
            for f in (0..dims.len()).rev() {
                let occ = rest % dims[f];
                rest /= dims[f];
                if boson(f) && occ >= cutoff {
                    return false;
                }
            }
            true
        })
        .collect()
}

/// The principal submatrix on `indices`.
pub fn restrict(m: &ComplexMatrix, indices: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(indices.len(), indices.len(), |i, j| m[(indices[i], indices[j])])
}

/// Indices of the well-converged low block: half the Fock cutoff for
/// truncated families, the whole space otherwise.
pub fn converged_block(model: &ModelSpec) -> Vec<usize> {
    let n_max = match model {
        ModelSpec::Oscillator(s) => s.n_max,
        ModelSpec::SpinBoson(s) => s.n_max,
        _ => return (0..model.dimension()).collect(),
    };
    low_occupation_indices(model, n_max / 2)
}

/// `‖H_exact - H_first‖₂ / ε²` on the block `keep`, with `channel` scaled by
/// `eps`. Roughly constant in `eps` when the first-order form is right.
pub fn first_order_residual(
    h: &Hermitian,
    channel: &NoiseChannel,
    model: Option<&ModelSpec>,
    eps: f64,
    keep: &[usize],
    tol: &Tolerances,
) -> Result<f64> {
    let c = channel.scaled(eps);
    let exact = dress_exact(h, &build_dressing_unitary(&c, model, tol)?)?;
    let first = dress_first_order(h, &c, model, tol)?;
    let diff = restrict(&(exact.matrix() - first.matrix()), keep);
    Ok(spectral_norm(&diff, tol)? / (eps * eps))
}
