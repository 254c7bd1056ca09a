use num_complex::Complex64;

use super::bcs::{bcs_generator, mode_rotation};
use super::channel::NoiseChannel;
use crate::linalg::{ComplexMatrix, Hermitian, I};
use crate::models::ladder::{annihilation, creation, embed};
use crate::models::oscillator::{momentum, position};
use crate::models::spin::qubit_bit;
use crate::models::spin_boson::spin_operator;
use crate::models::{FermionAlgebra, ModelSpec};
use crate::{paulis, Error, Result, Tolerances};

/// The weak-noise Hamiltonian `H + (linear terms in a)`.
///
/// * spin: `H + B Σ a_i σʸ_i`
/// * oscillator: `H + Σ (a_j p_j + a'_j x_j)`
/// * spin-boson: `H + B a₀ σʸ + σᶻ Σ λ_α (a_α + a_α*) + Σ ω_α (a_α b_α† + h.c.)`
/// * BCS and generic: `H + [G, H]` for `V = e^G`, i.e. `H + iε[H, P]`
pub fn dress_first_order(
    h: &Hermitian,
    channel: &NoiseChannel,
    model: Option<&ModelSpec>,
    tol: &Tolerances,
) -> Result<Hermitian> {
    if let NoiseChannel::Generic { generator, strength } = channel {
        if generator.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: generator.dim(),
            });
        }
        let c = h.matrix().commutator(generator.matrix()).scale(I * *strength);
        return Ok(Hermitian::from_trusted((h.matrix() + &c).symmetrized()));
    }
    let model = model.ok_or_else(|| {
        Error::Contract(format!("a {} channel needs a model to act on", channel.kind()))
    })?;
    channel.check_compatible(model)?;
    if h.dim() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            found: h.dim(),
        });
    }
    let linear = match (channel, model) {
        (NoiseChannel::SpinZ { angles }, ModelSpec::Spin(s)) => {
            let n = s.n_qubits;
            ComplexMatrix::from_fn(h.dim(), h.dim(), |y, x| {
                let mut z = Complex64::new(0.0, 0.0);
                for (q, a) in angles.iter().enumerate() {
                    if y == x ^ (1 << (n - 1 - q)) {
                        // σʸ|0⟩ = i|1⟩, σʸ|1⟩ = -i|0⟩
                        let sign = if qubit_bit(x, q, n) == 0 { 1.0 } else { -1.0 };
                        z += I * (sign * s.field * a);
                    }
                }
                z
            })
        }
        (
            NoiseChannel::Oscillator {
                momentum_shift,
                position_shift,
            },
            ModelSpec::Oscillator(s),
        ) => {
            let mut m = ComplexMatrix::zeros(h.dim(), h.dim());
            for j in 0..s.n_sites() {
                m = &m + &momentum(s, j, tol)?.scale_real(momentum_shift[j]);
                m = &m + &position(s, j, tol)?.scale_real(position_shift[j]);
            }
            m
        }
        (
            NoiseChannel::SpinBoson {
                spin_angle,
                displacements,
            },
            ModelSpec::SpinBoson(s),
        ) => {
            let dims = s.dims();
            let mut m = spin_operator(s, &paulis::y(), tol)?.scale_real(s.field * spin_angle);
            let z = spin_operator(s, &paulis::z(), tol)?;
            let b = annihilation(s.n_max);
            let bd = creation(s.n_max);
            for (alpha, (mode, &a)) in s.modes.iter().zip(displacements).enumerate() {
                m = &m + &z.scale_real(2.0 * mode.coupling * a.re);
                let hop = &bd.scale(a) + &b.scale(a.conj());
                m = &m + &embed(&[(alpha + 1, &hop)], &dims, tol.max_dim)?.scale_real(mode.frequency);
            }
            m
        }
        (NoiseChannel::Bcs { q, qprime, g, angle }, ModelSpec::Bcs(s)) => {
            let l = s.momenta();
            let alg = FermionAlgebra::spinful(l, tol)?;
            let gen = bcs_generator(&alg, l, &mode_rotation(l, *q, *qprime, g, *angle))?;
            gen.commutator(h.matrix())
        }
        _ => unreachable!("compatibility checked above"),
    };
    Ok(Hermitian::from_trusted((h.matrix() + &linear).symmetrized()))
}

/// The dressed Hamiltonian from the untruncated operator algebra, written in
/// the model's basis, constants included.
///
/// * spin: `H + B Σ [(cos a_i - 1) σˣ_i + sin a_i σʸ_i]`
/// * oscillator: `H + Σ (a_j p_j + a'_j x_j) + Σ m_j a_j²/2 + sᵀKs/2`
/// * spin-boson: `H + B[(cos a₀ - 1) σˣ + sin a₀ σʸ] + σᶻ Σ λ_α (a_α + a_α*)
///   + Σ ω_α (a_α b_α† + h.c. + |a_α|²)`
///
/// On a truncated Fock space this differs from `V H V†` with the truncated
/// `V`; the difference measures the truncation error.
pub fn dress_closed_form(
    h: &Hermitian,
    channel: &NoiseChannel,
    model: &ModelSpec,
    tol: &Tolerances,
) -> Result<Hermitian> {
    channel.check_compatible(model)?;
    let dim = h.dim();
    let id = ComplexMatrix::identity(dim);
    let extra = match (channel, model) {
        (NoiseChannel::SpinZ { angles }, ModelSpec::Spin(s)) => {
            let n = s.n_qubits;
            ComplexMatrix::from_fn(dim, dim, |y, x| {
                let mut z = Complex64::new(0.0, 0.0);
                for (q, a) in angles.iter().enumerate() {
                    if y == x ^ (1 << (n - 1 - q)) {
                        let sign = if qubit_bit(x, q, n) == 0 { 1.0 } else { -1.0 };
                        z += (a.cos() - 1.0 + I * (sign * a.sin())) * s.field;
                    }
                }
                z
            })
        }
        (
            NoiseChannel::Oscillator {
                momentum_shift,
                position_shift,
            },
            ModelSpec::Oscillator(s),
        ) => {
            let first = dress_first_order(h, channel, Some(model), tol)?;
            let shift = super::unitary::position_shift_solution(s, position_shift)?;
            let k = s.stiffness_matrix();
            let mut c: f64 = (0..s.n_sites())
                .map(|j| 0.5 * s.masses[j] * momentum_shift[j].powi(2))
                .sum();
            for i in 0..s.n_sites() {
                for j in 0..s.n_sites() {
                    c += 0.5 * shift[i] * k[i][j] * shift[j];
                }
            }
            return Ok(Hermitian::from_trusted(
                (first.matrix() + &id.scale_real(c)).symmetrized(),
            ));
        }
        (
            NoiseChannel::SpinBoson {
                spin_angle,
                displacements,
            },
            ModelSpec::SpinBoson(s),
        ) => {
            let rot = &spin_operator(s, &paulis::x(), tol)?.scale_real(s.field * (spin_angle.cos() - 1.0))
                + &spin_operator(s, &paulis::y(), tol)?.scale_real(s.field * spin_angle.sin());
            let z = spin_operator(s, &paulis::z(), tol)?;
            let dims = s.dims();
            let b = annihilation(s.n_max);
            let bd = creation(s.n_max);
            let mut m = rot;
            for (alpha, (mode, &a)) in s.modes.iter().zip(displacements).enumerate() {
                m = &m + &z.scale_real(2.0 * mode.coupling * a.re);
                let hop = &bd.scale(a) + &b.scale(a.conj());
                m = &m + &embed(&[(alpha + 1, &hop)], &dims, tol.max_dim)?.scale_real(mode.frequency);
                m = &m + &id.scale_real(mode.frequency * a.norm_sqr());
            }
            m
        }
        (c, m) => {
            return Err(Error::Contract(format!(
                "no closed-form dressing for a {} channel on the {} family",
                c.kind(),
                m.family()
            )))
        }
    };
    Ok(Hermitian::from_trusted((h.matrix() + &extra).symmetrized()))
}
