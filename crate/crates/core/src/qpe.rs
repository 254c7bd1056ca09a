//! Generalized phase estimation over a classical mixture of dressed
//! Hamiltonians.
//!
//! Phase convention: `U = e^{-iHt}` has eigenphase `φ = frac(-Et/2π)` and an
//! exactly representable outcome `j` satisfies `E t = -π j / 2^{n-1}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dressing::DressedChannel;
use crate::evolution::propagator;
use crate::linalg::{eigh, inner, norm_sqr, Hermitian, Spectrum, Unitary};
use crate::parallel::pairwise_sum;
use crate::{Error, Execution, Result, Tolerances};

/// Largest register for the statevector path.
pub const MAX_CIRCUIT_REGISTER: usize = 12;
/// Largest register for the closed-form path.
pub const MAX_KERNEL_REGISTER: usize = 24;
/// Largest statevector (register × system amplitudes).
pub const MAX_CIRCUIT_AMPLITUDES: usize = 1 << 20;
/// Phase offsets within this many bins of an integer are treated as exact.
const GRID_SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Amplitudes `C_u` over the eigenstates of the noiseless `H`.
    Eigen { coefficients: Vec<Complex64> },
    /// A computational basis state, expanded in the eigenbasis.
    Basis { index: usize },
    /// The uniform superposition of all basis states.
    Uniform,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Uniform
    }
}

impl InitialState {
    /// The physical state `|ψ⟩ = Σ C_u |u⟩` in the computational basis.
    pub fn state(&self, spectrum: &Spectrum, tol: &Tolerances) -> Result<Vec<Complex64>> {
        let d = spectrum.dim();
        match self {
            InitialState::Eigen { coefficients } => {
                if coefficients.len() != d {
                    return Err(Error::invalid(
                        "qpe.initial.coefficients",
                        format!("expected {d} entries, got {}", coefficients.len()),
                    ));
                }
                let n = norm_sqr(coefficients);
                if (n - 1.0).abs() > tol.normalization {
                    return Err(Error::invalid(
                        "qpe.initial.coefficients",
                        format!("Σ|C_u|² = {n}, not 1"),
                    ));
                }
                Ok(spectrum.eigenvectors.apply(coefficients))
            }
            InitialState::Basis { index } => {
                if *index >= d {
                    return Err(Error::invalid(
                        "qpe.initial.index",
                        format!("{index} out of range for dimension {d}"),
                    ));
                }
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[*index] = Complex64::new(1.0, 0.0);
                Ok(v)
            }
            InitialState::Uniform => Ok(vec![Complex64::new(1.0 / (d as f64).sqrt(), 0.0); d]),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpeMode {
    #[default]
    Kernel,
    Circuit,
}

/// Which state enters channel `a`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateReading {
    /// The same `|ψ⟩` for every channel, re-expanded in the dressed
    /// eigenbasis: `C^a_u = Σ_v ⟨u|V_a†|v⟩ C_v`.
    #[default]
    Reexpanded,
    /// The dressed state `V_a|ψ⟩`.
    Dressed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpeConfig {
    pub n_register: usize,
    /// Evolution time of `U`; `0.9π/‖H‖₂` when absent.
    #[serde(default)]
    pub t_evolution: Option<f64>,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub mode: QpeMode,
    #[serde(default)]
    pub reading: StateReading,
    #[serde(default)]
    pub keep_per_channel: bool,
}

impl QpeConfig {
    pub fn new(n_register: usize) -> Self {
        Self {
            n_register,
            t_evolution: None,
            initial: InitialState::default(),
            mode: QpeMode::default(),
            reading: StateReading::default(),
            keep_per_channel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let max = match self.mode {
            QpeMode::Kernel => MAX_KERNEL_REGISTER,
            QpeMode::Circuit => MAX_CIRCUIT_REGISTER,
        };
        if self.n_register == 0 || self.n_register > max {
            return Err(Error::invalid(
                "qpe.n_register",
                format!("must lie in 1..={max} for this mode"),
            ));
        }
        if let Some(t) = self.t_evolution {
            if !(t.is_finite() && t != 0.0) {
                return Err(Error::invalid("qpe.t_evolution", "must be finite and nonzero"));
            }
        }
        Ok(())
    }
}

/// Default evolution time: keeps `|E t| < π` for the whole spectrum.
pub fn default_evolution_time(norm: f64) -> f64 {
    if norm > 0.0 {
        0.9 * PI / norm
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub j: usize,
    pub energy: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpeResult {
    pub n_register: usize,
    pub t_evolution: f64,
    pub histogram: Vec<f64>,
    pub per_channel: Option<Vec<Vec<f64>>>,
    pub energy_estimates: Vec<EnergyEstimate>,
}

impl QpeResult {
    /// Outcomes with probability above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.histogram.len()).filter(|&j| self.histogram[j] > threshold).collect()
    }
}

/// `E = -π j / (2^{n-1} t)`, folded into `(-π/t, π/t]`.
pub fn energy_estimate(j: usize, n: usize, t: f64) -> f64 {
    let period = 2.0 * PI / t.abs();
    let mut e = -PI * j as f64 / (2f64.powi(n as i32 - 1) * t);
    while e <= -period / 2.0 {
        e += period;
    }
    while e > period / 2.0 {
        e -= period;
    }
    e
}

/// Eigenphase `frac(-E t / 2π)` in `[0, 1)`.
pub fn phase(e: f64, t: f64) -> f64 {
    (-e * t / (2.0 * PI)).rem_euclid(1.0)
}

/// `C^a_u = Σ_v ⟨u|V_a†|v⟩ C_v` in the noiseless eigenbasis.
pub fn channel_coefficients(c: &[Complex64], v: &Unitary, spectrum: &Spectrum) -> Result<Vec<Complex64>> {
    if c.len() != spectrum.dim() || v.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            found: if c.len() != spectrum.dim() { c.len() } else { v.dim() },
        });
    }
    let m = spectrum.to_eigenbasis(&v.matrix().adjoint());
    Ok(m.matvec(c))
}

/// `|K_n(δ)|² = sin²(2^n π δ) / (4^n sin²(π δ))` with `x = 2^n δ` given in
/// bins; exact at integer `x`.
fn kernel(x: f64, n: usize) -> f64 {
    let size = (1usize << n) as f64;
    let x = (x + size / 2.0).rem_euclid(size) - size / 2.0;
    let nearest = x.round();
    if (x - nearest).abs() < GRID_SNAP {
        return if nearest == 0.0 { 1.0 } else { 0.0 };
    }
    let num = (PI * x).sin();
    let den = size * (PI * x / size).sin();
    (num / den).powi(2)
}

/// `P(j) = Σ_u w_u |K_n(φ_u - j/2^n)|²` with `φ_u = frac(-E_u t / 2π)`.
pub fn qpe_kernel_distribution(energies: &[f64], weights: &[f64], t: f64, n: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    if energies.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: energies.len(),
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::invalid("weights", "must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol.histogram {
        return Err(Error::invalid("weights", format!("sum to {total}, not 1")));
    }
    if n == 0 || n > MAX_KERNEL_REGISTER {
        return Err(Error::invalid("qpe.n_register", format!("must lie in 1..={MAX_KERNEL_REGISTER}")));
    }
    let size = 1usize << n;
    let mut p = vec![0.0; size];
    for (&e, &w) in energies.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let x = phase(e, t) * size as f64;
        for (j, pj) in p.iter_mut().enumerate() {
            *pj += w * kernel(x - j as f64, n);
        }
    }
    Ok(p)
}

/// Statevector simulation: Hadamards on the register, controlled `U^k`,
/// inverse Fourier transform on the register, marginal over the system.
pub fn qpe_circuit_distribution(h: &Hermitian, psi: &[Complex64], t: f64, n: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    let d = h.dim();
    if psi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: psi.len(),
        });
    }
    if n == 0 || n > MAX_CIRCUIT_REGISTER {
        return Err(Error::invalid("qpe.n_register", format!("must lie in 1..={MAX_CIRCUIT_REGISTER}")));
    }
    let size = 1usize << n;
    if size.saturating_mul(d) > MAX_CIRCUIT_AMPLITUDES {
        return Err(Error::Capacity {
            requested: size.saturating_mul(d),
            max: MAX_CIRCUIT_AMPLITUDES,
        });
    }
    let u = propagator(h, t, tol)?;
    // branch[s][k] = (U^k ψ)_s / 2^{n/2}
    let amp = 1.0 / (size as f64).sqrt();
    let mut branch = vec![vec![Complex64::new(0.0, 0.0); size]; d];
    let mut state: Vec<Complex64> = psi.to_vec();
    for k in 0..size {
        for s in 0..d {
            branch[s][k] = state[s] * amp;
        }
        state = u.apply(&state);
    }
    // Inverse QFT: |k⟩ → 2^{-n/2} Σ_j e^{-2πi jk / 2^n} |j⟩.
    let fft = FftPlanner::new().plan_fft_forward(size);
    let mut p = vec![0.0; size];
    for row in &mut branch {
        fft.process(row);
        for (pj, a) in p.iter_mut().zip(row.iter()) {
            *pj += (a * amp).norm_sqr();
        }
    }
    Ok(p)
}

/// Energies and block-summed weights `|⟨u|ψ⟩|²` of `ψ` in the eigenbasis of
/// `spectrum`; degenerate levels are merged so the result does not depend on
/// the basis chosen inside a degenerate block.
pub fn spectral_weights(spectrum: &Spectrum, psi: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let gap = 1e-9 * (1.0 + spectrum.norm());
    let mut energies = Vec::new();
    let mut weights = Vec::new();
    for block in spectrum.degenerate_blocks(gap) {
        let w: f64 = block.clone().map(|u| inner(&spectrum.eigenvector(u), psi).norm_sqr()).sum();
        let e = block.clone().map(|u| spectrum.eigenvalues[u]).sum::<f64>() / block.len() as f64;
        energies.push(e);
        weights.push(w);
    }
    (energies, weights)
}

/// `Σ_a p_a P_a(j)` over the dressed channels of `h`.
pub fn run_generalized_qpe(
    h: &Hermitian,
    channels: &[DressedChannel],
    cfg: &QpeConfig,
    exec: Execution,
    tol: &Tolerances,
) -> Result<QpeResult> {
    cfg.validate()?;
    if channels.is_empty() {
        return Err(Error::invalid("ensemble", "needs at least one channel"));
    }
    let spectrum = eigh(h, tol)?;
    let psi = cfg.initial.state(&spectrum, tol)?;
    let t = cfg.t_evolution.unwrap_or_else(|| default_evolution_time(spectrum.norm()));
    let n = cfg.n_register;

    let per_channel = exec.try_map(channels, |c| -> Result<Vec<f64>> {
        if c.hamiltonian.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: c.hamiltonian.dim(),
            });
        }
        let state = match cfg.reading {
            StateReading::Reexpanded => psi.clone(),
            StateReading::Dressed => c
                .unitary
                .as_ref()
                .ok_or_else(|| Error::invalid("qpe.reading", "the dressed reading needs exact dressing"))?
                .apply(&psi),
        };
        match cfg.mode {
            QpeMode::Kernel => {
                let s = eigh(&c.hamiltonian, tol)?;
                let (e, mut w) = spectral_weights(&s, &state);
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= total);
                qpe_kernel_distribution(&e, &w, t, n, tol)
            }
            QpeMode::Circuit => qpe_circuit_distribution(&c.hamiltonian, &state, t, n, tol),
        }
    })?;

    let total: f64 = channels.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > tol.weights {
        return Err(Error::invalid("ensemble.weight", format!("weights sum to {total}, not 1")));
    }
    let scaled: Vec<Vec<f64>> = per_channel
        .iter()
        .zip(channels)
        .map(|(p, c)| p.iter().map(|x| x * c.weight).collect())
        .collect();
    let histogram = pairwise_sum(scaled, |a, b| a.iter().zip(b).map(|(x, y)| x + y).collect())
        .expect("at least one channel");
    let sum: f64 = histogram.iter().sum();
    if (sum - 1.0).abs() > tol.histogram {
        return Err(Error::Numerical(format!("phase histogram sums to {sum}")));
    }
    let energy_estimates = histogram
        .iter()
        .enumerate()
        .map(|(j, &p)| EnergyEstimate {
            j,
            energy: energy_estimate(j, n, t),
            probability: p,
        })
        .collect();
    Ok(QpeResult {
        n_register: n,
        t_evolution: t,
        histogram,
        per_channel: cfg.keep_per_channel.then_some(per_channel),
        energy_estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dressing::{dress_ensemble, ChannelEnsemble, DressingMode, NoiseChannel, WeightedChannel};
    use crate::linalg::ComplexMatrix;
    use crate::testing::{random_hermitian, random_state, random_unitary, rng};
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Energy whose phase is exactly `j / 2^n`.
    fn on_grid(j: usize, n: usize, t: f64) -> f64 {
        -PI * j as f64 / (2f64.powi(n as i32 - 1) * t)
    }

    #[test]
    fn on_grid_phase_is_deterministic() {
        let (n, t) = (5, 0.7);
        for j0 in [0, 3, 17, 31] {
            let p = qpe_kernel_distribution(&[on_grid(j0, n, t)], &[1.0], t, n, &tol()).unwrap();
            assert_eq!(p[j0], 1.0);
            assert!(p.iter().enumerate().all(|(j, &x)| j == j0 || x == 0.0));
        }
    }

    #[test]
    fn off_grid_worst_case_bound() {
        let (n, t) = (4, 1.0);
        let size = 16.0;
        for frac in [0.1, 0.25, 0.4, 0.5] {
            let phi = (5.0 + frac) / size;
            let e = -2.0 * PI * phi / t;
            let p = qpe_kernel_distribution(&[e], &[1.0], t, n, &tol()).unwrap();
            let nearest = (phi * size).round() as usize % 16;
            assert!(p[nearest] >= 4.0 / (PI * PI) - 1e-12, "{frac}: {}", p[nearest]);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_on_grid_energies_split() {
        let (n, t) = (3, 0.5);
        let e = [on_grid(1, n, t), on_grid(6, n, t)];
        let p = qpe_kernel_distribution(&e, &[0.5, 0.5], t, n, &tol()).unwrap();
        assert_eq!(p[1], 0.5);
        assert_eq!(p[6], 0.5);
    }

    #[test]
    fn energy_estimates_round_trip() {
        let (n, t) = (6, 0.3);
        for j in 0..64 {
            let e = energy_estimate(j, n, t);
            assert!(e > -PI / t && e <= PI / t);
            let back = phase(e, t) * 64.0;
            assert!((back - j as f64).abs() < 1e-9 || (back - j as f64).abs() > 63.0);
        }
    }

    #[test]
    fn circuit_examples() {
        let (n, t) = (3, 1.0);
        let e: Vec<f64> = [2, 5].iter().map(|&j| on_grid(j, n, t)).collect();
        let h = Hermitian::from_real_diagonal(&e);
        let p = qpe_circuit_distribution(&h, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], t, n, &tol()).unwrap();
        assert!((p[2] - 1.0).abs() < 1e-12);
        let zero = Hermitian::zeros(3);
        let psi = random_state(&mut rng(1), 3);
        let p = qpe_circuit_distribution(&zero, &psi, 0.4, 4, &tol()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_matches_kernel() {
        let mut r = rng(42);
        for (d, n) in [(4, 5), (2, 3), (8, 6)] {
            let h = random_hermitian(&mut r, d);
            let psi = random_state(&mut r, d);
            let t = 0.8;
            let s = eigh(&h, &tol()).unwrap();
            let (e, w) = spectral_weights(&s, &psi);
            let k = qpe_kernel_distribution(&e, &w, t, n, &tol()).unwrap();
            let c = qpe_circuit_distribution(&h, &psi, t, n, &tol()).unwrap();
            let diff = k.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-9, "d={d} n={n}: {diff:e}");
        }
    }

    #[test]
    fn coefficients_under_identity_and_unitaries() {
        let mut r = rng(7);
        let h = random_hermitian(&mut r, 4);
        let s = eigh(&h, &tol()).unwrap();
        let c = random_state(&mut r, 4);
        let same = channel_coefficients(&c, &Unitary::identity(4), &s).unwrap();
        assert!(same.iter().zip(&c).all(|(a, b)| (a - b).norm() < 1e-14));
        let v = random_unitary(&mut r, 4);
        let ca = channel_coefficients(&c, &v, &s).unwrap();
        assert!((norm_sqr(&ca) - 1.0).abs() < 1e-10);
        // C^a_u is the overlap of ψ = Σ C_v|v⟩ with the dressed eigenvector V|u⟩.
        let psi = s.eigenvectors.apply(&c);
        for (u, cu) in ca.iter().enumerate() {
            let dressed = v.apply(&s.eigenvector(u));
            assert!((inner(&dressed, &psi) - cu).norm() < 1e-10);
        }
    }

    fn generic_channels(h: &Hermitian, count: usize, sigma: f64, seed: u64) -> Vec<DressedChannel> {
        let mut r = rng(seed);
        let entries = (0..count)
            .map(|_| WeightedChannel {
                weight: 1.0 / count as f64,
                channel: NoiseChannel::Generic {
                    generator: random_hermitian(&mut r, h.dim()),
                    strength: sigma,
                },
            })
            .collect();
        let ens = ChannelEnsemble::new(entries, &tol()).unwrap();
        dress_ensemble(h, None, &ens, DressingMode::Exact, Execution::Parallel, &tol()).unwrap()
    }

    #[test]
    fn exact_dressing_keeps_on_grid_support() {
        let n = 6;
        let t = 0.5;
        let e: Vec<f64> = [3, 10, 10, 41, 63].iter().map(|&j| on_grid(j, n, t)).collect();
        let h = Hermitian::from_real_diagonal(&e);
        let mut cfg = QpeConfig::new(n);
        cfg.t_evolution = Some(t);
        let clean = run_generalized_qpe(&h, &generic_channels(&h, 1, 0.0, 1), &cfg, Execution::Sequential, &tol()).unwrap();
        for sigma in [0.05, 0.2] {
            let noisy = run_generalized_qpe(&h, &generic_channels(&h, 20, sigma, 2), &cfg, Execution::Parallel, &tol()).unwrap();
            assert_eq!(noisy.support(0.0), clean.support(0.0));
            assert_eq!(clean.support(0.0), vec![3, 10, 41, 63]);
        }
    }

    #[test]
    fn dressed_reading_reproduces_noiseless_weights() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 5);
        let mut cfg = QpeConfig::new(5);
        cfg.reading = StateReading::Dressed;
        let clean = run_generalized_qpe(&h, &generic_channels(&h, 1, 0.0, 1), &cfg, Execution::Sequential, &tol()).unwrap();
        let noisy = run_generalized_qpe(&h, &generic_channels(&h, 6, 0.3, 4), &cfg, Execution::Sequential, &tol()).unwrap();
        let d = clean.histogram.iter().zip(&noisy.histogram).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-9);
    }

    #[test]
    fn degenerate_basis_does_not_matter() {
        let e = [0.3, 0.3, -0.2, -0.2];
        let h = Hermitian::from_real_diagonal(&e);
        let psi = random_state(&mut rng(9), 4);
        let a = eigh(&h, &tol()).unwrap();
        // Rotate inside each degenerate block.
        let mut r = rng(10);
        let blk = random_unitary(&mut r, 2);
        let rot = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i / 2 == j / 2 {
                blk.matrix()[(i % 2, j % 2)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let b = Spectrum {
            eigenvalues: a.eigenvalues.clone(),
            eigenvectors: Unitary::new(a.eigenvectors.matrix().matmul(&rot), &tol()).unwrap(),
        };
        let (ea, wa) = spectral_weights(&a, &psi);
        let (eb, wb) = spectral_weights(&b, &psi);
        assert_eq!(ea.len(), 2);
        assert!(ea.iter().zip(&eb).all(|(x, y)| (x - y).abs() < 1e-14));
        assert!(wa.iter().zip(&wb).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn config_validation() {
        let mut cfg = QpeConfig::new(0);
        assert!(cfg.validate().is_err());
        cfg.n_register = 13;
        cfg.mode = QpeMode::Circuit;
        assert!(cfg.validate().is_err());
        cfg.mode = QpeMode::Kernel;
        assert!(cfg.validate().is_ok());
        let h = Hermitian::zeros(2);
        let bad = InitialState::Eigen {
            coefficients: vec![Complex64::new(1.0, 0.0); 2],
        };
        assert!(bad.state(&eigh(&h, &tol()).unwrap(), &tol()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn histograms_normalized(seed in any::<u64>(), n in 1usize..7, t in 0.1f64..3.0) {
            let mut r = rng(seed);
            let h = random_hermitian(&mut r, 3);
            let s = eigh(&h, &tol()).unwrap();
            let psi = random_state(&mut r, 3);
            let (e, w) = spectral_weights(&s, &psi);
            let k = qpe_kernel_distribution(&e, &w, t, n, &tol()).unwrap();
            prop_assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(k.iter().all(|&x| x >= 0.0));
            let c = qpe_circuit_distribution(&h, &psi, t, n, &tol()).unwrap();
            prop_assert!(k.iter().zip(&c).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }
}
