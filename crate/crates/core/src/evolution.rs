//! Channel-averaged unitary evolution `ρ(t) = Σ_a p_a e^{-iH_a t} ρ₀ e^{iH_a t}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{eigh, unitary_exp, ComplexMatrix, Hermitian, Spectrum, Unitary};
use crate::parallel::pairwise_sum;
use crate::{Error, Execution, Result, Tolerances};

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() || !m.is_finite() {
            return Err(Error::Contract("density matrix must be square and finite".into()));
        }
        let defect = m.hermiticity_defect();
        if defect > tol.density {
            return Err(Error::Contract(format!("density matrix is not Hermitian ({defect:e})")));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol.density {
            return Err(Error::Contract(format!("density matrix trace is {tr}, not 1")));
        }
        let h = Hermitian::from_trusted(m.symmetrized());
        let lowest = eigh(&h, tol)?.eigenvalues[0];
        if lowest < -tol.positivity {
            return Err(Error::Contract(format!(
                "density matrix has negative eigenvalue {lowest:e}"
            )));
        }
        Ok(Self(h.into_matrix()))
    }

    /// `|ψ⟩⟨ψ|` for a normalized state.
    pub fn pure(psi: &[Complex64], tol: &Tolerances) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > tol.normalization {
            return Err(Error::Contract(format!("state norm² is {norm}, not 1")));
        }
        Ok(Self(ComplexMatrix::outer_product(psi, psi)))
    }

    /// The projector onto the uniform superposition of `dim` basis states.
    pub fn uniform_superposition(dim: usize) -> Self {
        let amp = Complex64::new(1.0 / dim as f64, 0.0);
        Self(ComplexMatrix::from_fn(dim, dim, |_, _| amp))
    }

    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)].norm_sqr())
            .sum()
    }

    /// `½ Σ |λ_i(ρ - σ)|`
    pub fn trace_distance(&self, other: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
        let diff = Hermitian::from_trusted((&self.0 - &other.0).symmetrized());
        Ok(0.5 * eigh(&diff, tol)?.eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
    }

    /// `Tr[ρ O]`
    pub fn expectation(&self, o: &ComplexMatrix) -> Complex64 {
        let n = self.dim();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += self.0[(i, j)] * o[(j, i)];
            }
        }
        s
    }
}

/// Uniform sample times `t_start + k dt`, `k < n_samples`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub t_start: f64,
    pub dt: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n_samples: usize) -> Result<Self> {
        let g = Self { t_start, dt, n_samples };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_start.is_finite() {
            return Err(Error::invalid("grid.t_start", "must be finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("grid.dt", "must be positive and finite"));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("grid.n_samples", "must be at least 1"));
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.time(k)).collect()
    }
}

/// `e^{-iHt}` for many `t` from a single eigendecomposition of `H`.
#[derive(Clone, Debug)]
pub struct Propagator {
    spectrum: Spectrum,
}

impl Propagator {
    pub fn new(h: &Hermitian, tol: &Tolerances) -> Result<Self> {
        Ok(Self {
            spectrum: eigh(h, tol)?,
        })
    }

    pub fn from_spectrum(spectrum: Spectrum) -> Self {
        Self { spectrum }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn at(&self, t: f64) -> Unitary {
        unitary_exp(&self.spectrum, t)
    }
}

/// `e^{-iHt}`
pub fn propagator(h: &Hermitian, t: f64, tol: &Tolerances) -> Result<Unitary> {
    Ok(Propagator::new(h, tol)?.at(t))
}

/// Checks `p_a ≥ 0`, `Σ p_a = 1` and matching dimensions.
pub(crate) fn check_channels(channels: &[(f64, Hermitian)], dim: usize, tol: &Tolerances) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::invalid("ensemble", "needs at least one channel"));
    }
    for (p, h) in channels {
        if !(*p >= 0.0 && p.is_finite()) {
            return Err(Error::invalid("ensemble.weight", "weights must be finite and nonnegative"));
        }
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: h.dim(),
            });
        }
    }
    let total: f64 = channels.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > tol.weights {
        return Err(Error::invalid("ensemble.weight", format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// `ρ(t)` on every grid time. Channels are diagonalized once each; for each
/// time the per-channel terms are reduced pairwise in channel order, so the
/// result does not depend on `exec`.
pub fn evolve_averaged(
    channels: &[(f64, Hermitian)],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    exec: Execution,
    tol: &Tolerances,
) -> Result<Vec<DensityMatrix>> {
    grid.validate()?;
    check_channels(channels, rho0.dim(), tol)?;
    let props = exec.try_map(channels, |(p, h)| Ok::<_, Error>((*p, Propagator::new(h, tol)?)))?;
    let out = exec.map_range(grid.n_samples, |k| {
        let t = grid.time(k);
        let terms: Vec<ComplexMatrix> = props
            .iter()
            .map(|(p, prop)| {
                let u = prop.at(t);
                u.matrix()
                    .matmul(&rho0.matrix().matmul(&u.matrix().adjoint()))
                    .scale_real(*p)
            })
            .collect();
        let sum = pairwise_sum(terms, |a, b| a + b).expect("at least one channel");
        DensityMatrix::from_trusted(sum.symmetrized())
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use crate::testing::{random_hermitian, random_state, rng};
    use crate::{paulis, Tolerances};
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// `exp(-iHt)` by scaling and squaring of a truncated Taylor series.
    fn series_propagator(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let norm = h.frobenius_norm() * t.abs();
        let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
        let a = h.scale(-I * t / 2f64.powi(squarings as i32));
        let mut term = ComplexMatrix::identity(h.rows());
        let mut sum = term.clone();
        for k in 1..30 {
            term = term.matmul(&a).scale_real(1.0 / k as f64);
            sum = &sum + &term;
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn propagator_examples() {
        let mut r = rng(1);
        let h = random_hermitian(&mut r, 5);
        let u = propagator(&h, 0.0, &tol()).unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(5)) < 1e-14);

        let z = Hermitian::from_trusted(paulis::z());
        let u = propagator(&z, std::f64::consts::PI, &tol()).unwrap();
        assert!(u.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-14);
    }

    #[test]
    fn propagator_matches_series() {
        let mut r = rng(2);
        let h = random_hermitian(&mut r, 6);
        for t in [0.1, 1.3, -2.7] {
            let u = propagator(&h, t, &tol()).unwrap();
            assert!(u.matrix().max_abs_diff(&series_propagator(h.matrix(), t)) < 1e-10);
        }
    }

    #[test]
    fn group_property() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 7);
        let p = Propagator::new(&h, &tol()).unwrap();
        for (t1, t2) in [(0.3, 0.9), (-1.2, 2.5), (4.0, 4.0)] {
            let prod = p.at(t1).then_apply(&p.at(t2)).unwrap();
            assert!(prod.matrix().max_abs_diff(p.at(t1 + t2).matrix()) < 1e-10);
        }
    }

    #[test]
    fn single_channel_keeps_purity() {
        let mut r = rng(4);
        let h = random_hermitian(&mut r, 6);
        let rho = DensityMatrix::pure(&random_state(&mut r, 6), &tol()).unwrap();
        let grid = TimeGrid::new(0.0, 0.37, 20).unwrap();
        let out = evolve_averaged(&[(1.0, h)], &rho, &grid, Execution::Parallel, &tol()).unwrap();
        for s in &out {
            assert!((s.purity() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_term_average() {
        let mut r = rng(5);
        let h = random_hermitian(&mut r, 4);
        let rho = DensityMatrix::pure(&random_state(&mut r, 4), &tol()).unwrap();
        let grid = TimeGrid::new(0.5, 0.25, 6).unwrap();
        let chans = [(0.5, h.clone()), (0.5, h.scale(-1.0))];
        let out = evolve_averaged(&chans, &rho, &grid, Execution::Sequential, &tol()).unwrap();
        for (k, s) in out.iter().enumerate() {
            let u = series_propagator(h.matrix(), grid.time(k));
            let ud = u.adjoint();
            let a = u.matmul(&rho.matrix().matmul(&ud));
            let b = ud.matmul(&rho.matrix().matmul(&u));
            let want = (&a + &b).scale_real(0.5);
            assert!(s.matrix().max_abs_diff(&want) < 1e-10);
        }
    }

    #[test]
    fn identical_channels_collapse() {
        let mut r = rng(6);
        let h = random_hermitian(&mut r, 5);
        let rho = DensityMatrix::pure(&random_state(&mut r, 5), &tol()).unwrap();
        let grid = TimeGrid::new(0.0, 0.2, 8).unwrap();
        let one = evolve_averaged(&[(1.0, h.clone())], &rho, &grid, Execution::Sequential, &tol()).unwrap();
        let many: Vec<(f64, Hermitian)> = (0..4).map(|_| (0.25, h.clone())).collect();
        let four = evolve_averaged(&many, &rho, &grid, Execution::Sequential, &tol()).unwrap();
        for (a, b) in one.iter().zip(&four) {
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        }
    }

    #[test]
    fn contract_errors() {
        let h = Hermitian::from_trusted(paulis::x());
        let rho = DensityMatrix::uniform_superposition(2);
        let grid = TimeGrid::new(0.0, 0.1, 4).unwrap();
        let e = evolve_averaged(&[(0.6, h.clone())], &rho, &grid, Execution::Sequential, &tol());
        assert!(matches!(e, Err(Error::InvalidParameter { .. })));
        let big = Hermitian::zeros(3);
        let e = evolve_averaged(&[(1.0, big)], &rho, &grid, Execution::Sequential, &tol());
        assert!(matches!(e, Err(Error::DimensionMismatch { .. })));
        assert!(TimeGrid::new(0.0, 0.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 0.1, 0).is_err());
        let bad = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(bad, &tol()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.3, 0.3]), &tol()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn mixture_invariants(seed in any::<u64>(), count in 1usize..6, dt in 0.01f64..2.0) {
            let mut r = rng(seed);
            let d = 4;
            let rho = DensityMatrix::pure(&random_state(&mut r, d), &tol()).unwrap();
            let chans: Vec<(f64, Hermitian)> =
                (0..count).map(|_| (1.0 / count as f64, random_hermitian(&mut r, d))).collect();
            let grid = TimeGrid::new(0.0, dt, 5).unwrap();
            let seq = evolve_averaged(&chans, &rho, &grid, Execution::Sequential, &tol()).unwrap();
            let par = evolve_averaged(&chans, &rho, &grid, Execution::Parallel, &tol()).unwrap();
            prop_assert_eq!(&seq, &par);
            for s in &seq {
                prop_assert!((s.matrix().trace().re - 1.0).abs() <= 1e-10);
                let h = Hermitian::from_trusted(s.matrix().clone());
                prop_assert!(eigh(&h, &tol()).unwrap().eigenvalues[0] >= -1e-9);
                prop_assert!(s.purity() <= rho.purity() + 1e-9);
                prop_assert!(DensityMatrix::new(s.matrix().clone(), &tol()).is_ok());
            }
        }
    }
}
