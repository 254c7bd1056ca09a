use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::channel::NoiseChannel;
use crate::linalg::{conjugate, eigh, expm_antihermitian, ComplexMatrix, Hermitian, Unitary};
use crate::models::bcs::{build_pairing_hamiltonian, spin_energies};
use crate::models::{fermion_operator, BcsSpec, FermionAlgebra, FermionKind, SpinLabel};
use crate::{Error, Result, Tolerances};

/// Single-particle matrix `A` of the spin-down rotation
/// `angle · Σ_k g(k) (c†_{q-k↓} c_{q'-k↓} - c†_{q'-k↓} c_{q-k↓})`,
/// written as `Σ_ij A_ij c†_i↓ c_j↓`.
pub fn mode_rotation(momenta: usize, q: i64, qprime: i64, g: &[f64], angle: f64) -> Vec<Vec<f64>> {
    let l = momenta as i64;
    let mut a = vec![vec![0.0; momenta]; momenta];
    for (k, &gk) in g.iter().enumerate() {
        let k = k as i64;
        let to = (q - k).rem_euclid(l) as usize;
        let from = (qprime - k).rem_euclid(l) as usize;
        a[to][from] += angle * gk;
        a[from][to] -= angle * gk;
    }
    a
}

/// Many-body generator `Σ_ij A_ij c†_i↓ c_j↓` on the `2L`-mode Fock space.
pub fn bcs_generator(alg: &FermionAlgebra, momenta: usize, rotation: &[Vec<f64>]) -> Result<ComplexMatrix> {
    let dim = alg.dim();
    let mut g = ComplexMatrix::zeros(dim, dim);
    for (i, row) in rotation.iter().enumerate() {
        for (j, &aij) in row.iter().enumerate() {
            if aij == 0.0 {
                continue;
            }
            let ci = alg.annihilator(alg.site(i as i64, SpinLabel::Down))?;
            let cj = alg.annihilator(alg.site(j as i64, SpinLabel::Down))?;
            g = &g + &ci.adjoint().matmul(cj).scale_real(aij);
        }
    }
    debug_assert_eq!(alg.dim(), 1 << (2 * momenta));
    Ok(g)
}

/// `V_q = exp(G)` for the spin-down momentum rotation.
pub fn build_bcs_dressing(
    spec: &BcsSpec,
    q: i64,
    qprime: i64,
    g: &[f64],
    angle: f64,
    tol: &Tolerances,
) -> Result<Unitary> {
    let l = spec.momenta();
    if g.len() != l {
        return Err(Error::invalid(
            "channel.g",
            format!("expected {l} entries, got {}", g.len()),
        ));
    }
    if (q - qprime).rem_euclid(l as i64) == 0 {
        return Err(Error::invalid(
            "channel.q",
            format!("q = {q} and qprime = {qprime} coincide mod {l}; the generator vanishes"),
        ));
    }
    let alg = FermionAlgebra::spinful(l, tol)?;
    let gen = bcs_generator(&alg, l, &mode_rotation(l, q, qprime, g, angle))?;
    expm_antihermitian(&gen, tol)
}

/// A channel whose rotation maps spin-down momentum `m` to `m + q - qprime`
/// exactly (up to fermionic signs).
///
/// A single exponential of the rotation family realizes this when the shift
/// is half the ring (a product of commuting swaps at angle π/2) or when
/// `L = 3` (a rotation by 2π/3 about the uniform axis).
pub fn bcs_translation(momenta: usize, q: i64, qprime: i64) -> Result<NoiseChannel> {
    let l = momenta as i64;
    let d = (q - qprime).rem_euclid(l.max(1));
    if d == 0 {
        return Err(Error::invalid(
            "channel.q",
            format!("q = {q} and qprime = {qprime} coincide mod {l}"),
        ));
    }
    if 2 * d == l {
        let g = (0..l)
            .map(|k| if (qprime - k).rem_euclid(l) < d { 1.0 } else { 0.0 })
            .collect();
        return Ok(NoiseChannel::Bcs {
            q,
            qprime,
            g,
            angle: FRAC_PI_2,
        });
    }
    if l == 3 {
        return Ok(NoiseChannel::Bcs {
            q,
            qprime,
            g: vec![1.0; 3],
            angle: 2.0 * PI / (3.0 * 3f64.sqrt()),
        });
    }
    Err(Error::invalid(
        "channel.q",
        format!("no single rotation translates {l} momenta by {d}"),
    ))
}

/// Largest deviation of `exp(A)` from the cyclic shift `m → m + d`.
pub fn translation_defect(rotation: &[Vec<f64>], d: i64) -> f64 {
    let n = rotation.len();
    let a = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(rotation[i][j], 0.0));
    let Ok(u) = expm_antihermitian(&a, &Tolerances::default()) else {
        return f64::INFINITY;
    };
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let want = if i as i64 == (j as i64 + d).rem_euclid(n as i64) { 1.0 } else { 0.0 };
            worst = worst.max((u.matrix()[(i, j)].norm() - want).abs());
        }
    }
    worst
}

/// Deviations of the spin-down momentum translation by `q` from its
/// expected action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BcsStructure {
    /// `max |V K V† - Σ ε_kσ(q) n_kσ|` for the kinetic term `K`.
    pub kinetic: f64,
    /// `max |V H V† - H_q|` against the directly assembled `H_q`.
    pub hamiltonian: f64,
    /// Largest sorted-eigenvalue difference between `H` and `V H V†`.
    pub spectrum: f64,
}

pub fn bcs_structure(spec: &BcsSpec, q: i64, tol: &Tolerances) -> Result<BcsStructure> {
    spec.validate(tol)?;
    let l = spec.momenta();
    let NoiseChannel::Bcs { g, angle, qprime, .. } = bcs_translation(l, q, 0)? else {
        unreachable!("bcs_translation returns a Bcs channel")
    };
    let v = build_bcs_dressing(spec, q, qprime, &g, angle, tol)?;
    let alg = FermionAlgebra::spinful(l, tol)?;
    let kinetic_of = |energies: &[f64]| -> Result<ComplexMatrix> {
        let mut k = ComplexMatrix::zeros(alg.dim(), alg.dim());
        for (site, e) in energies.iter().enumerate() {
            k = &k + &fermion_operator(&alg, site, FermionKind::Number)?.scale_real(*e);
        }
        Ok(k)
    };
    let kinetic = conjugate(&Hermitian::from_trusted(kinetic_of(&spin_energies(spec, 0))?), &v)?;
    let kinetic = kinetic.matrix().max_abs_diff(&kinetic_of(&spin_energies(spec, q))?);
    let h = build_pairing_hamiltonian(spec, 0, false, tol)?;
    let hq = conjugate(&h, &v)?;
    let hamiltonian = hq.matrix().max_abs_diff(build_pairing_hamiltonian(spec, q, true, tol)?.matrix());
    let a = eigh(&h, tol)?.eigenvalues;
    let b = eigh(&hq, tol)?.eigenvalues;
    let spectrum = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(BcsStructure {
        kinetic,
        hamiltonian,
        spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Interaction;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn spec(energies: &[f64], g: f64) -> BcsSpec {
        BcsSpec {
            energies: energies.to_vec(),
            interaction: Interaction::Constant { g },
        }
    }

    fn number_down(alg: &FermionAlgebra, k: i64) -> ComplexMatrix {
        fermion_operator(alg, alg.site(k, SpinLabel::Down), FermionKind::Number).unwrap()
    }

    #[test]
    fn zero_weights_give_identity() {
        let s = spec(&[0.1, 0.2], 0.3);
        let v = build_bcs_dressing(&s, 1, 0, &[0.0, 0.0], FRAC_PI_2, &tol()).unwrap();
        assert!(v.matrix().max_abs_diff(&ComplexMatrix::identity(16)) < 1e-14);
    }

    #[test]
    fn coincident_momenta_rejected() {
        let s = spec(&[0.1, 0.2, 0.3], 0.3);
        let e = build_bcs_dressing(&s, 3, 0, &[1.0; 3], FRAC_PI_2, &tol());
        assert!(matches!(e, Err(Error::InvalidParameter { .. })));
        assert!(bcs_translation(3, 2, 2).is_err());
    }

    #[test]
    fn constant_weights_cancel_on_two_momenta() {
        let a = mode_rotation(2, 1, 0, &[1.0, 1.0], FRAC_PI_2);
        assert!(a.iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn half_ring_swap() {
        let s = spec(&[0.1, 0.2], 0.3);
        let NoiseChannel::Bcs { q, qprime, g, angle } = bcs_translation(2, 1, 0).unwrap() else {
            unreachable!()
        };
        assert_eq!(g, vec![1.0, 0.0]);
        let v = build_bcs_dressing(&s, q, qprime, &g, angle, &tol()).unwrap();
        let alg = FermionAlgebra::spinful(2, &tol()).unwrap();
        for m in 0..2 {
            let moved = conjugate(&Hermitian::from_trusted(number_down(&alg, m)), &v).unwrap();
            assert!(moved.matrix().max_abs_diff(&number_down(&alg, m + 1)) < 1e-12);
        }
    }

    #[test]
    fn three_momenta_rotation_is_a_cyclic_shift() {
        for (q, qp) in [(1, 0), (2, 0), (0, 1), (2, 1)] {
            let NoiseChannel::Bcs { g, angle, .. } = bcs_translation(3, q, qp).unwrap() else {
                unreachable!()
            };
            let d = (q - qp).rem_euclid(3);
            assert!(translation_defect(&mode_rotation(3, q, qp, &g, angle), d) < 1e-12);
        }
        for l in [4, 6] {
            let NoiseChannel::Bcs { q, qprime, g, angle } = bcs_translation(l, l as i64 / 2, 0).unwrap() else {
                unreachable!()
            };
            assert!(translation_defect(&mode_rotation(l, q, qprime, &g, angle), l as i64 / 2) < 1e-12);
        }
        assert!(bcs_translation(4, 1, 0).is_err());
    }

    #[test]
    fn single_particle_energies_follow_the_shift() {
        let s = spec(&[0.1, 0.2, 0.3], -0.5);
        let q = 1;
        let NoiseChannel::Bcs { g, angle, qprime, .. } = bcs_translation(3, q, 0).unwrap() else {
            unreachable!()
        };
        let v = build_bcs_dressing(&s, q, qprime, &g, angle, &tol()).unwrap();
        let free = Hermitian::from_real_diagonal(&vec![0.0; 64]);
        let alg = FermionAlgebra::spinful(3, &tol()).unwrap();
        let mut kinetic = free.matrix().clone();
        for (site, e) in spin_energies(&s, 0).iter().enumerate() {
            kinetic = &kinetic + &fermion_operator(&alg, site, FermionKind::Number).unwrap().scale_real(*e);
        }
        let dressed = conjugate(&Hermitian::from_trusted(kinetic), &v).unwrap();
        let mut want = ComplexMatrix::zeros(64, 64);
        for (site, e) in spin_energies(&s, q).iter().enumerate() {
            want = &want + &fermion_operator(&alg, site, FermionKind::Number).unwrap().scale_real(*e);
        }
        assert!(dressed.matrix().max_abs_diff(&want) < 1e-9);

        let h = build_pairing_hamiltonian(&s, 0, false, &tol()).unwrap();
        let hq = conjugate(&h, &v).unwrap();
        let direct = build_pairing_hamiltonian(&s, q, true, &tol()).unwrap();
        assert!(hq.matrix().max_abs_diff(direct.matrix()) < 1e-9);
        let a = eigh(&h, &tol()).unwrap().eigenvalues;
        let b = eigh(&hq, &tol()).unwrap().eigenvalues;
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));

        let r = bcs_structure(&s, q, &tol()).unwrap();
        assert!(r.kinetic < 1e-9 && r.hamiltonian < 1e-9 && r.spectrum < 1e-9, "{r:?}");
    }
}
