use serde::{Deserialize, Serialize};

use super::fermion::{FermionAlgebra, SpinLabel};
use crate::linalg::{ComplexMatrix, Hermitian};
use crate::{Error, Result, Tolerances};

/// Largest momentum count: `2^{2L}` must stay within the dense limit.
pub const MAX_MOMENTA: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Interaction {
    /// `V_{k,k'} = G` for every pair: the reduced BCS model.
    Constant { g: f64 },
    Matrix { v: Vec<Vec<f64>> },
}

/// Pairing Hamiltonian on a periodic ring of `L` momenta; `-k` is `(L - k) mod L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcsSpec {
    /// Single-particle energies `ε_k`, one per momentum.
    pub energies: Vec<f64>,
    pub interaction: Interaction,
}

impl BcsSpec {
    pub fn momenta(&self) -> usize {
        self.energies.len()
    }

    pub fn dimension(&self) -> usize {
        1 << (2 * self.momenta().min(31))
    }

    pub fn coupling(&self, k: usize, kp: usize) -> f64 {
        match &self.interaction {
            Interaction::Constant { g } => *g,
            Interaction::Matrix { v } => v[k][kp],
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let l = self.momenta();
        if l == 0 {
            return Err(Error::invalid("model.energies", "need at least one momentum"));
        }
        if l > MAX_MOMENTA || self.dimension() > tol.max_dim {
            return Err(Error::Capacity {
                requested: self.dimension(),
                max: tol.max_dim,
            });
        }
        if self.energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("model.energies", "must be finite"));
        }
        match &self.interaction {
            Interaction::Constant { g } if !g.is_finite() => {
                return Err(Error::invalid("model.interaction.g", "must be finite"));
            }
            Interaction::Matrix { v } => {
                if v.len() != l || v.iter().any(|r| r.len() != l) {
                    return Err(Error::invalid("model.interaction.v", format!("must be {l}x{l}")));
                }
                for i in 0..l {
                    for j in 0..l {
                        if !v[i][j].is_finite() || (v[i][j] - v[j][i]).abs() > 1e-12 * (1.0 + v[i][j].abs()) {
                            return Err(Error::invalid("model.interaction.v", "must be finite and symmetric"));
                        }
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// `η_q(k) = c_{k↑} c_{q-k↓}`
pub fn pair_annihilator(alg: &FermionAlgebra, q: i64, k: i64) -> Result<ComplexMatrix> {
    let up = alg.annihilator(alg.site(k, SpinLabel::Up))?;
    let down = alg.annihilator(alg.site(q - k, SpinLabel::Down))?;
    Ok(up.matmul(down))
}

/// `Σ_kσ ε_k n_kσ + Σ_{k,k'} V_{k,k'} η_0†(k') η_0(k)`
pub fn build_bcs_hamiltonian(spec: &BcsSpec, tol: &Tolerances) -> Result<Hermitian> {
    build_pairing_hamiltonian(spec, 0, false, tol)
}

/// The momentum-`q` pairing Hamiltonian
/// `Σ_kσ ε_kσ(q) n_kσ + Σ V_{k,k'} η_q†(k') η_q(k)`.
///
/// With `shift_down_energies` the spin-down energies are `ε_{k-q}`, which is
/// the form obtained by translating the spin-down momenta of the `q = 0`
/// model; otherwise both spins carry `ε_k`.
pub fn build_pairing_hamiltonian(
    spec: &BcsSpec,
    q: i64,
    shift_down_energies: bool,
    tol: &Tolerances,
) -> Result<Hermitian> {
    spec.validate(tol)?;
    let l = spec.momenta();
    let alg = FermionAlgebra::spinful(l, tol)?;
    let energies = spin_energies(spec, if shift_down_energies { q } else { 0 });
    let dim = alg.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (site, &e) in energies.iter().enumerate() {
        let c = alg.annihilator(site)?;
        h = &h + &c.adjoint().matmul(c).scale_real(e);
    }
    let pairs: Vec<ComplexMatrix> = (0..l as i64)
        .map(|k| pair_annihilator(&alg, q, k))
        .collect::<Result<_>>()?;
    for (k, eta) in pairs.iter().enumerate() {
        for (kp, eta_p) in pairs.iter().enumerate() {
            let v = spec.coupling(k, kp);
            if v != 0.0 {
                h = &h + &eta_p.adjoint().matmul(eta).scale_real(v);
            }
        }
    }
    Ok(Hermitian::from_trusted(h.symmetrized()))
}

/// Per-site single-particle energies in Jordan-Wigner order:
/// `ε_k` for spin up, `ε_{k-q}` for spin down.
pub fn spin_energies(spec: &BcsSpec, q: i64) -> Vec<f64> {
    let l = spec.momenta() as i64;
    let up = spec.energies.iter().copied();
    let down = (0..l).map(|k| spec.energies[(k - q).rem_euclid(l) as usize]);
    up.chain(down).collect()
}

/// `Σ n_kσ`
pub fn total_number(alg: &FermionAlgebra) -> ComplexMatrix {
    let dim = alg.dim();
    let d: Vec<f64> = (0..dim).map(|x| x.count_ones() as f64).collect();
    debug_assert!(alg.n_modes() <= usize::BITS as usize);
    ComplexMatrix::from_real_diagonal(&d)
}

/// Largest off-diagonal matrix element of `h` that does not correspond to a
/// single momentum-`q` pair move `η_q†(k') η_q(k)`.
pub fn pair_structure_violation(h: &ComplexMatrix, momenta: usize, q: i64) -> f64 {
    let n = 2 * momenta;
    let bit = |site: usize| 1usize << (n - 1 - site);
    let l = momenta as i64;
    let pair_mask = |k: i64| {
        let up = k.rem_euclid(l) as usize;
        let down = momenta + (q - k).rem_euclid(l) as usize;
        bit(up) | bit(down)
    };
    let dim = 1usize << n;
    let mut worst: f64 = 0.0;
    for x in 0..dim {
        let mut allowed = std::collections::BTreeSet::new();
        for k in 0..l {
            let removed = pair_mask(k);
            if x & removed != removed {
                continue;
            }
            let rest = x & !removed;
            for kp in 0..l {
                let added = pair_mask(kp);
                if rest & added == 0 {
                    allowed.insert(rest | added);
                }
            }
        }
        for y in 0..dim {
            if y != x && !allowed.contains(&y) {
                worst = worst.max(h[(y, x)].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;
    use num_complex::Complex64;

    fn constant(energies: Vec<f64>, g: f64) -> BcsSpec {
        BcsSpec {
            energies,
            interaction: Interaction::Constant { g },
        }
    }

    fn levels(spec: &BcsSpec) -> Vec<f64> {
        let tol = Tolerances::default();
        eigh(&build_bcs_hamiltonian(spec, &tol).unwrap(), &tol).unwrap().eigenvalues
    }

    /// Second-quantized assembly on occupation bitstrings: `c_j` acting on
    /// `c†_0^{n_0} c†_1^{n_1} … |vac⟩` picks up `(-1)` per occupied mode
    /// created before `j`. Operator products are applied right to left to
    /// basis states rather than multiplied as matrices.
    struct Fock {
        modes: usize,
    }

    impl Fock {
        fn apply(&self, ops: &[(bool, usize)], x: usize) -> Option<(f64, usize)> {
            let mut state = x;
            let mut sign = 1.0;
            for &(create, j) in ops.iter().rev() {
                let b = 1usize << (self.modes - 1 - j);
                let occupied = state & b != 0;
                if create == occupied {
                    return None;
                }
                let before = (0..j).filter(|&s| state & (1usize << (self.modes - 1 - s)) != 0).count();
                if before % 2 == 1 {
                    sign = -sign;
                }
                state ^= b;
            }
            Some((sign, state))
        }
    }

    fn fock_oracle(spec: &BcsSpec) -> ComplexMatrix {
        let l = spec.momenta();
        let n = 2 * l;
        let fock = Fock { modes: n };
        let dim = 1 << n;
        let up = |k: usize| k % l;
        let down = |k: usize| l + k % l;
        let minus = |k: usize| (l - k % l) % l;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for x in 0..dim {
            for k in 0..l {
                for site in [up(k), down(k)] {
                    if let Some((s, y)) = fock.apply(&[(true, site), (false, site)], x) {
                        m[(y, x)] += Complex64::new(s * spec.energies[k], 0.0);
                    }
                }
            }
            for k in 0..l {
                for kp in 0..l {
                    // η†(k') η(k) = c†_{-k'↓} c†_{k'↑} c_{k↑} c_{-k↓}
                    let ops = [
                        (true, down(minus(kp))),
                        (true, up(kp)),
                        (false, up(k)),
                        (false, down(minus(k))),
                    ];
                    if let Some((s, y)) = fock.apply(&ops, x) {
                        m[(y, x)] += Complex64::new(s * spec.coupling(k, kp), 0.0);
                    }
                }
            }
        }
        m
    }

    #[test]
    fn single_momentum_analytic() {
        let (e, g) = (0.4, -0.7);
        let ev = levels(&constant(vec![e], g));
        let mut want = vec![0.0, e, e, 2.0 * e + g];
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn free_fermions_are_subset_sums() {
        let eps = [0.3, -0.45];
        let ev = levels(&constant(eps.to_vec(), 0.0));
        let singles = [eps[0], eps[1], eps[0], eps[1]];
        let mut want: Vec<f64> = (0..16usize)
            .map(|m| (0..4).filter(|b| m >> b & 1 == 1).map(|b| singles[b]).sum())
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn three_momenta_match_fock_assembly() {
        let spec = constant(vec![0.1, 0.2, 0.3], -0.5);
        let tol = Tolerances::default();
        let h = build_bcs_hamiltonian(&spec, &tol).unwrap();
        let oracle = fock_oracle(&spec);
        assert!(h.matrix().max_abs_diff(&oracle) < 1e-14);
        let a = eigh(&h, &tol).unwrap().eigenvalues;
        let b = eigh(&Hermitian::new(oracle, &tol).unwrap(), &tol).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn matrix_interaction_matches_fock_assembly() {
        let spec = BcsSpec {
            energies: vec![-0.2, 0.1, 0.35],
            interaction: Interaction::Matrix {
                v: vec![vec![-0.5, 0.2, 0.1], vec![0.2, -0.3, 0.05], vec![0.1, 0.05, -0.4]],
            },
        };
        let h = build_bcs_hamiltonian(&spec, &Tolerances::default()).unwrap();
        assert!(h.matrix().max_abs_diff(&fock_oracle(&spec)) < 1e-14);
    }

    #[test]
    fn particle_number_conserved() {
        let tol = Tolerances::default();
        let spec = constant(vec![0.1, 0.2, 0.3], -0.5);
        let h = build_bcs_hamiltonian(&spec, &tol).unwrap();
        let alg = FermionAlgebra::spinful(3, &tol).unwrap();
        assert!(h.matrix().commutator(&total_number(&alg)).max_abs() < 1e-10);
    }

    #[test]
    fn zero_momentum_pairs_have_structure() {
        let spec = constant(vec![0.1, 0.2, 0.3], -0.5);
        let h = build_bcs_hamiltonian(&spec, &Tolerances::default()).unwrap();
        assert!(pair_structure_violation(h.matrix(), 3, 0) < 1e-15);
        assert!(pair_structure_violation(h.matrix(), 3, 1) > 0.1);
    }

    #[test]
    fn validation() {
        let tol = Tolerances::default();
        assert!(matches!(constant(vec![0.0; 7], 1.0).validate(&tol), Err(Error::Capacity { .. })));
        let asym = BcsSpec {
            energies: vec![0.0, 0.0],
            interaction: Interaction::Matrix { v: vec![vec![0.0, 1.0], vec![0.5, 0.0]] },
        };
        assert!(asym.validate(&tol).is_err());
        assert!(constant(vec![], 1.0).validate(&tol).is_err());
    }
}
