//! Numerical policy shared by every module.
//!
//! All thresholds live in one record so that a run can override them from
//! its configuration file and so that the values in effect can be written to
//! the run manifest.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative Hermiticity bound: `max|M - M†| <= hermitian_rel * max|M|`.
    pub hermitian_rel: f64,
    /// Absolute unitarity bound on `max|U†U - I|`.
    pub unitary: f64,
    /// Relative eigen-residual bound: `|Hv - Ev| <= eigen_residual * (1 + |H|₂)`.
    pub eigen_residual: f64,
    /// Density-matrix Hermiticity and trace bound.
    pub density: f64,
    /// Smallest admissible density-matrix eigenvalue is `-positivity`.
    pub positivity: f64,
    /// Bound on `|Σ|C_u|² - 1|` for amplitude vectors.
    pub normalization: f64,
    /// Bound on `|Σ p_a - 1|` for ensemble weights.
    pub weights: f64,
    /// Bound on `|Σ_j P(j) - 1|` for phase-estimation histograms.
    pub histogram: f64,
    /// Largest dense Hilbert-space dimension any builder will allocate.
    pub max_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian_rel: 1e-12,
            unitary: 1e-10,
            eigen_residual: 1e-9,
            density: 1e-10,
            positivity: 1e-9,
            normalization: 1e-10,
            weights: 1e-12,
            histogram: 1e-9,
            max_dim: 4096,
        }
    }
}

impl Tolerances {
    pub fn check_dim(&self, dim: usize) -> crate::Result<()> {
        if dim > self.max_dim {
            Err(crate::Error::Capacity {
                requested: dim,
                max: self.max_dim,
            })
        } else {
            Ok(())
        }
    }
}
