use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ladder::{annihilation, creation, embed, product_dim};
use super::spin::{validate_couplings, Coupling};
use crate::linalg::{ComplexMatrix, Hermitian};
use crate::{Error, Result, Tolerances};

/// Coupled harmonic sites: `Σ p²/2m + k x²/2 + Σ k_ij (x_i - x_j)²/2`, with
/// every potential minimum shifted to the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    pub masses: Vec<f64>,
    /// On-site stiffness `k_i`, the curvature of the site potential.
    pub stiffness: Vec<f64>,
    /// Pair stiffness `k_ij`.
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    /// Occupations `0..n_max` are kept per site.
    pub n_max: usize,
}

impl OscillatorSpec {
    pub fn n_sites(&self) -> usize {
        self.masses.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.n_max; self.n_sites()]
    }

    /// Site-local harmonic frequency `√(k_i/m_i)`, which fixes the `x`/`p` scale.
    pub fn site_frequency(&self, i: usize) -> f64 {
        (self.stiffness[i] / self.masses[i]).sqrt()
    }

    /// Full stiffness matrix `K` of the quadratic potential `xᵀKx/2`.
    pub fn stiffness_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_sites();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            k[i][i] = self.stiffness[i];
        }
        for c in &self.couplings {
            k[c.i][c.i] += c.value;
            k[c.j][c.j] += c.value;
            k[c.i][c.j] -= c.value;
            k[c.j][c.i] -= c.value;
        }
        k
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let n = self.n_sites();
        if n == 0 {
            return Err(Error::invalid("model.masses", "need at least one site"));
        }
        if self.stiffness.len() != n {
            return Err(Error::invalid(
                "model.stiffness",
                format!("expected {n} entries, got {}", self.stiffness.len()),
            ));
        }
        if self.masses.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::invalid("model.masses", "must be positive and finite"));
        }
        if self.stiffness.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::invalid("model.stiffness", "must be positive and finite"));
        }
        validate_couplings(&self.couplings, n, "model.couplings")?;
        if self.couplings.iter().any(|c| c.value < 0.0) {
            return Err(Error::invalid("model.couplings", "pair stiffness must be nonnegative"));
        }
        if self.n_max < 2 {
            return Err(Error::invalid("model.n_max", "must be at least 2"));
        }
        product_dim(&self.dims(), tol.max_dim)?;
        Ok(())
    }
}

fn local_position(spec: &OscillatorSpec, i: usize) -> ComplexMatrix {
    let scale = 1.0 / (2.0 * spec.masses[i] * spec.site_frequency(i)).sqrt();
    (&annihilation(spec.n_max) + &creation(spec.n_max)).scale_real(scale)
}

fn local_momentum(spec: &OscillatorSpec, i: usize) -> ComplexMatrix {
    let scale = (spec.masses[i] * spec.site_frequency(i) / 2.0).sqrt();
    (&creation(spec.n_max) - &annihilation(spec.n_max)).scale(Complex64::new(0.0, scale))
}

/// `x_i = (b + b†)/√(2 m_i ω_i)` on the full product space.
pub fn position(spec: &OscillatorSpec, i: usize, tol: &Tolerances) -> Result<ComplexMatrix> {
    embed(&[(i, &local_position(spec, i))], &spec.dims(), tol.max_dim)
}

/// `p_i = i√(m_i ω_i / 2)(b† - b)` on the full product space.
pub fn momentum(spec: &OscillatorSpec, i: usize, tol: &Tolerances) -> Result<ComplexMatrix> {
    embed(&[(i, &local_momentum(spec, i))], &spec.dims(), tol.max_dim)
}

pub fn build_oscillator_hamiltonian(spec: &OscillatorSpec, tol: &Tolerances) -> Result<Hermitian> {
    spec.validate(tol)?;
    let n = spec.n_sites();
    let dims = spec.dims();
    let dim = product_dim(&dims, tol.max_dim)?;
    let xs: Vec<ComplexMatrix> = (0..n).map(|i| local_position(spec, i)).collect();

    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..n {
        let p = local_momentum(spec, i);
        let local = &p.matmul(&p).scale_real(0.5 / spec.masses[i]) + &xs[i].matmul(&xs[i]).scale_real(0.5 * spec.stiffness[i]);
        h = &h + &embed(&[(i, &local)], &dims, tol.max_dim)?;
    }
    for c in &spec.couplings {
        // (x_i - x_j)² = x_i² + x_j² - 2 x_i x_j
        let xi2 = xs[c.i].matmul(&xs[c.i]);
        let xj2 = xs[c.j].matmul(&xs[c.j]);
        let sq = &embed(&[(c.i, &xi2)], &dims, tol.max_dim)? + &embed(&[(c.j, &xj2)], &dims, tol.max_dim)?;
        let cross = embed(&[(c.i, &xs[c.i]), (c.j, &xs[c.j])], &dims, tol.max_dim)?;
        h = &h + &(&sq - &cross.scale_real(2.0)).scale_real(0.5 * c.value);
    }
    Ok(Hermitian::from_trusted(h.symmetrized()))
}
