//! Jordan-Wigner fermions: `c_j = Z ⊗ … ⊗ Z ⊗ a ⊗ I ⊗ … ⊗ I` with `j` string
//! factors and `a = |0⟩⟨1|`, `|1⟩` meaning occupied.

use serde::{Deserialize, Serialize};

use crate::linalg::{kron_all, ComplexMatrix};
use crate::paulis;
use crate::{Error, Result, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinLabel {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FermionKind {
    Create,
    Annihilate,
    Number,
}

/// How `(k, σ)` labels map to Jordan-Wigner sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeOrder {
    /// Mode `j` is site `j`.
    Plain,
    /// All spin-up momenta first (by `k`), then all spin-down momenta.
    SpinMomentum { momenta: usize },
}

/// Largest algebra whose anticommutation relations are checked eagerly.
const EAGER_CHECK_MODES: usize = 6;

#[derive(Clone, Debug)]
pub struct FermionAlgebra {
    n_modes: usize,
    order: ModeOrder,
    annihilators: Vec<ComplexMatrix>,
}

impl FermionAlgebra {
    pub fn new(n_modes: usize, tol: &Tolerances) -> Result<Self> {
        Self::with_order(n_modes, ModeOrder::Plain, tol)
    }

    /// `2L` modes for spin-½ fermions on `L` momenta.
    pub fn spinful(momenta: usize, tol: &Tolerances) -> Result<Self> {
        Self::with_order(2 * momenta, ModeOrder::SpinMomentum { momenta }, tol)
    }

    fn with_order(n_modes: usize, order: ModeOrder, tol: &Tolerances) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("n_modes", "must be at least 1"));
        }
        if n_modes >= usize::BITS as usize || (1usize << n_modes) > tol.max_dim {
            return Err(Error::Capacity {
                requested: 1usize << n_modes.min(40),
                max: tol.max_dim,
            });
        }
        let z = paulis::z();
        let id = ComplexMatrix::identity(2);
        let lower = ComplexMatrix::from_fn(2, 2, |i, j| {
            num_complex::Complex64::new(if i == 0 && j == 1 { 1.0 } else { 0.0 }, 0.0)
        });
        let annihilators = (0..n_modes)
            .map(|j| {
                let factors = (0..n_modes).map(|s| match s.cmp(&j) {
                    std::cmp::Ordering::Less => &z,
                    std::cmp::Ordering::Equal => &lower,
                    std::cmp::Ordering::Greater => &id,
                });
                kron_all(factors, tol.max_dim)
            })
            .collect::<Result<Vec<_>>>()?;
        let alg = Self {
            n_modes,
            order,
            annihilators,
        };
        if n_modes <= EAGER_CHECK_MODES {
            let defect = alg.anticommutator_defect();
            if defect > 1e-12 {
                return Err(Error::Numerical(format!(
                    "canonical anticommutation violated by {defect:e}"
                )));
            }
        }
        Ok(alg)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    pub fn order(&self) -> ModeOrder {
        self.order
    }

    /// Site of momentum `k` (reduced mod `L`) with spin `s`.
    pub fn site(&self, k: i64, s: SpinLabel) -> usize {
        match self.order {
            ModeOrder::Plain => k.rem_euclid(self.n_modes as i64) as usize,
            ModeOrder::SpinMomentum { momenta } => {
                let k = k.rem_euclid(momenta as i64) as usize;
                match s {
                    SpinLabel::Up => k,
                    SpinLabel::Down => momenta + k,
                }
            }
        }
    }

    pub fn annihilator(&self, mode: usize) -> Result<&ComplexMatrix> {
        self.annihilators.get(mode).ok_or_else(|| {
            Error::invalid("mode", format!("{mode} out of range for {} modes", self.n_modes))
        })
    }

    /// Largest deviation from `{c_i, c_j†} = δ_ij` and `{c_i, c_j} = 0`.
    pub fn anticommutator_defect(&self) -> f64 {
        let n = self.dim();
        let id = ComplexMatrix::identity(n);
        let mut worst: f64 = 0.0;
        for i in 0..self.n_modes {
            for j in 0..self.n_modes {
                let ci = &self.annihilators[i];
                let cj = &self.annihilators[j];
                let cjd = cj.adjoint();
                let mixed = &ci.matmul(&cjd) + &cjd.matmul(ci);
                let want = if i == j { id.clone() } else { ComplexMatrix::zeros(n, n) };
                worst = worst.max(mixed.max_abs_diff(&want));
                let same = &ci.matmul(cj) + &cj.matmul(ci);
                worst = worst.max(same.max_abs());
            }
        }
        worst
    }
}

pub fn fermion_operator(alg: &FermionAlgebra, mode: usize, kind: FermionKind) -> Result<ComplexMatrix> {
    let c = alg.annihilator(mode)?;
    Ok(match kind {
        FermionKind::Annihilate => c.clone(),
        FermionKind::Create => c.adjoint(),
        FermionKind::Number => c.adjoint().matmul(c),
    })
}
