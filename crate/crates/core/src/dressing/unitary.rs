use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::bcs::build_bcs_dressing;
use super::channel::NoiseChannel;
use crate::linalg::{conjugate, expm_antihermitian, ComplexMatrix, Hermitian, Unitary, I};
use crate::models::ladder::{annihilation, creation};
use crate::models::spin::z_sign;
use crate::models::{ModelSpec, OscillatorSpec};
use crate::{Error, Result, Tolerances};

/// The exact dressing `V_a` of `channel` on the model's Hilbert space.
///
/// Spin rotations use the half angle, `e^{-i a σᶻ/2}`, so that
/// `V σˣ V† = cos a σˣ + sin a σʸ`. Oscillator position shifts solve
/// `K s = -a'` so that the linear term is exactly `a'·x`.
pub fn build_dressing_unitary(
    channel: &NoiseChannel,
    model: Option<&ModelSpec>,
    tol: &Tolerances,
) -> Result<Unitary> {
    if let NoiseChannel::Generic { generator, strength } = channel {
        if let Some(m) = model {
            channel.check_compatible(m)?;
        }
        return expm_antihermitian(&generator.matrix().scale(-I * *strength), tol);
    }
    let model = model.ok_or_else(|| {
        Error::Contract(format!("a {} channel needs a model to act on", channel.kind()))
    })?;
    model.validate(tol)?;
    channel.check_compatible(model)?;
    match (channel, model) {
        (NoiseChannel::SpinZ { angles }, ModelSpec::Spin(s)) => {
            Ok(Unitary::from_phases(&spin_phases(angles, s.n_qubits)))
        }
        (
            NoiseChannel::Oscillator {
                momentum_shift,
                position_shift,
            },
            ModelSpec::Oscillator(s),
        ) => oscillator_dressing(s, momentum_shift, position_shift, tol),
        (
            NoiseChannel::SpinBoson {
                spin_angle,
                displacements,
            },
            ModelSpec::SpinBoson(s),
        ) => {
            let mut v = Unitary::from_phases(&[-spin_angle / 2.0, spin_angle / 2.0]);
            for &a in displacements {
                v = v.kron(&displacement(s.n_max, a, tol)?);
            }
            Ok(v)
        }
        (NoiseChannel::Bcs { q, qprime, g, angle }, ModelSpec::Bcs(s)) => {
            build_bcs_dressing(s, *q, *qprime, g, *angle, tol)
        }
        _ => unreachable!("compatibility checked above"),
    }
}

/// `H_a = V H V†`
pub fn dress_exact(h: &Hermitian, v: &Unitary) -> Result<Hermitian> {
    conjugate(h, v)
}

/// `V H V†` for diagonal `V = diag(e^{iθ})`, elementwise.
pub(crate) fn dress_diagonal(h: &Hermitian, phases: &[f64]) -> Result<Hermitian> {
    if phases.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: phases.len(),
        });
    }
    let m = h.matrix();
    let out = ComplexMatrix::from_fn(h.dim(), h.dim(), |i, j| {
        m[(i, j)] * Complex64::from_polar(1.0, phases[i] - phases[j])
    });
    Ok(Hermitian::from_trusted(out.symmetrized()))
}

/// Diagonal phases of `Π_i e^{-i a_i σᶻ_i / 2}`.
pub(crate) fn spin_phases(angles: &[f64], n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|x| {
            -0.5 * angles
                .iter()
                .enumerate()
                .map(|(q, a)| a * z_sign(x, q, n))
                .sum::<f64>()
        })
        .collect()
}

/// `exp(a* b - a b†)` on `n_max` Fock levels, i.e. the coherent displacement `D(-a)`.
pub fn displacement(n_max: usize, a: Complex64, tol: &Tolerances) -> Result<Unitary> {
    let g = &annihilation(n_max).scale(a.conj()) - &creation(n_max).scale(a);
    expm_antihermitian(&g, tol)
}

/// Solution `s` of `K s = -a'`.
pub(crate) fn position_shift_solution(spec: &OscillatorSpec, aprime: &[f64]) -> Result<Vec<f64>> {
    let k = spec.stiffness_matrix();
    let n = spec.n_sites();
    let km = DMatrix::from_fn(n, n, |i, j| k[i][j]);
    let rhs = DVector::from_iterator(n, aprime.iter().map(|a| -a));
    km.lu()
        .solve(&rhs)
        .map(|s| s.iter().copied().collect())
        .ok_or_else(|| Error::Numerical("stiffness matrix is singular".into()))
}

fn oscillator_dressing(
    spec: &OscillatorSpec,
    momentum_shift: &[f64],
    position_shift: &[f64],
    tol: &Tolerances,
) -> Result<Unitary> {
    let s = position_shift_solution(spec, position_shift)?;
    let b = annihilation(spec.n_max);
    let bd = creation(spec.n_max);
    let mut v: Option<Unitary> = None;
    for j in 0..spec.n_sites() {
        let w = spec.site_frequency(j);
        let m = spec.masses[j];
        let x = (&b + &bd).scale_real(1.0 / (2.0 * m * w).sqrt());
        let p = (&bd - &b).scale(I * (m * w / 2.0).sqrt());
        // e^{-i a m x} e^{-i s p} on this site
        let kick = expm_antihermitian(&x.scale(-I * momentum_shift[j] * m), tol)?;
        let shift = expm_antihermitian(&p.scale(-I * s[j]), tol)?;
        let local = kick.then_apply(&shift)?;
        v = Some(match v {
            None => local,
            Some(acc) => acc.kron(&local),
        });
    }
    let v = v.expect("validated spec has at least one site");
    tol.check_dim(v.dim())?;
    Ok(v)
}
