//! Free-induction-decay readout: `V(t) = V₀ Σ_a p_a Tr[U_a(t) ρ₀ U_a(t)† O]`,
//! its Fourier spectrum, peak extraction and matching against the
//! eigen-gaps `ω_uv = E_u - E_v` of the noiseless Hamiltonian.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::evolution::{check_channels, DensityMatrix, Propagator, TimeGrid};
use crate::linalg::{ComplexMatrix, Hermitian, Spectrum};
use crate::parallel::pairwise_sum;
use crate::{paulis, Error, Execution, Result, Tolerances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// `σˣ_k + iσʸ_k` on qubit `k` of a `2^n`-dimensional space.
    Ladder { qubit: usize },
    Matrix { matrix: ComplexMatrix },
}

impl Default for Observable {
    fn default() -> Self {
        Observable::Ladder { qubit: 0 }
    }
}

impl Observable {
    pub fn build(&self, dim: usize) -> Result<ComplexMatrix> {
        match self {
            Observable::Matrix { matrix } => {
                if matrix.rows() != dim || matrix.cols() != dim {
                    return Err(Error::invalid(
                        "fid.observable.matrix",
                        format!("must be {dim}x{dim}, got {}x{}", matrix.rows(), matrix.cols()),
                    ));
                }
                if !matrix.is_finite() {
                    return Err(Error::invalid("fid.observable.matrix", "entries must be finite"));
                }
                Ok(matrix.clone())
            }
            Observable::Ladder { qubit } => {
                if !dim.is_power_of_two() {
                    return Err(Error::invalid(
                        "fid.observable.qubit",
                        format!("a qubit ladder needs a power-of-two dimension, got {dim}"),
                    ));
                }
                let n = dim.trailing_zeros() as usize;
                if *qubit >= n {
                    return Err(Error::invalid(
                        "fid.observable.qubit",
                        format!("qubit {qubit} out of range for {n} qubits"),
                    ));
                }
                let local = paulis::raising();
                let shift = n - 1 - qubit;
                Ok(ComplexMatrix::from_fn(dim, dim, |y, x| {
                    let (by, bx) = ((y >> shift) & 1, (x >> shift) & 1);
                    if (y ^ x) & !(1 << shift) == 0 {
                        local[(by, bx)]
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    None,
    #[default]
    Hann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidConfig {
    #[serde(default = "unit")]
    pub v0: f64,
    #[serde(default)]
    pub observable: Observable,
    pub grid: TimeGrid,
    #[serde(default)]
    pub window: Window,
    /// Peaks below this fraction of the largest power are dropped.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Largest `|peak - gap|` counted as a match; one DFT bin when absent.
    #[serde(default)]
    pub match_tolerance: Option<f64>,
    /// Lines weaker than this fraction of the strongest line are not reported
    /// as missing. `0.25` pairs with the default peak threshold (`0.05` in
    /// power, about `0.22` in amplitude).
    #[serde(default = "default_floor")]
    pub amplitude_floor: f64,
}

fn unit() -> f64 {
    1.0
}

fn default_threshold() -> f64 {
    0.05
}

fn default_floor() -> f64 {
    0.25
}

impl FidConfig {
    pub fn new(grid: TimeGrid) -> Self {
        Self {
            v0: 1.0,
            observable: Observable::default(),
            grid,
            window: Window::default(),
            threshold: default_threshold(),
            match_tolerance: None,
            amplitude_floor: default_floor(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !self.v0.is_finite() {
            return Err(Error::invalid("fid.v0", "must be finite"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid("fid.threshold", "must lie in (0, 1)"));
        }
        if let Some(t) = self.match_tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("fid.match_tolerance", "must be positive"));
            }
        }
        if !(self.amplitude_floor >= 0.0) {
            return Err(Error::invalid("fid.amplitude_floor", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        bin_width(&self.grid)
    }
}

/// Frequency spacing `2π / (N dt)` of the DFT.
pub fn bin_width(grid: &TimeGrid) -> f64 {
    2.0 * PI / (grid.n_samples as f64 * grid.dt)
}

/// Largest step that resolves every line of spectra with the given norm and
/// spread without aliasing: `π / max(‖H‖₂, E_max - E_min)`.
pub fn max_alias_free_dt(norm: f64, spread: f64) -> f64 {
    PI / norm.max(spread)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub frequency: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidResult {
    pub times: Vec<f64>,
    pub signal: Vec<Complex64>,
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    /// Sorted by descending amplitude.
    pub peaks: Vec<Peak>,
    pub bin_width: f64,
}

/// `V(t_k)` for every grid time. Each channel is diagonalized once; the
/// per-time channel terms are reduced pairwise in channel order.
pub fn fid_signal(
    channels: &[(f64, Hermitian)],
    rho0: &DensityMatrix,
    observable: &ComplexMatrix,
    cfg: &FidConfig,
    exec: Execution,
    tol: &Tolerances,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let dim = rho0.dim();
    check_channels(channels, dim, tol)?;
    if observable.rows() != dim || observable.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: observable.rows(),
        });
    }
    let props = exec.try_map(channels, |(p, h)| Ok::<_, Error>((*p, Propagator::new(h, tol)?)))?;
    let (norm, spread) = props.iter().fold((0.0f64, 0.0f64), |(n, s), (_, pr)| {
        (n.max(pr.spectrum().norm()), s.max(pr.spectrum().spread()))
    });
    let limit = max_alias_free_dt(norm, spread);
    if !(cfg.grid.dt < limit) {
        return Err(Error::invalid(
            "fid.grid.dt",
            format!("dt = {} aliases the spectrum; it must be below {limit}", cfg.grid.dt),
        ));
    }
    let rho = rho0.matrix();
    Ok(exec.map_range(cfg.grid.n_samples, |k| {
        let t = cfg.grid.time(k);
        let terms: Vec<Complex64> = props
            .iter()
            .map(|(p, prop)| {
                let u = prop.at(t);
                let evolved = u.matrix().matmul(&rho.matmul(&u.matrix().adjoint()));
                DensityMatrix::from_trusted(evolved).expectation(observable) * *p
            })
            .collect();
        pairwise_sum(terms, |a, b| a + b).expect("at least one channel") * cfg.v0
    }))
}

/// Two-sided spectrum with frequencies ascending from `-π/dt`.
///
/// `power(ω) = |(1/N) Σ_k w_k s_k e^{iωt_k}|²`, so a tone `e^{-iω₀t}` shows
/// up at `+ω₀` and a unit tone on a bin has unit power without a window.
pub fn dft_spectrum(signal: &[Complex64], grid: &TimeGrid, window: Window) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = signal.len();
    if n < 8 {
        return Err(Error::invalid("fid.grid.n_samples", "need at least 8 samples"));
    }
    if n != grid.n_samples {
        return Err(Error::DimensionMismatch {
            expected: grid.n_samples,
            found: n,
        });
    }
    let mut buf: Vec<Complex64> = signal
        .iter()
        .enumerate()
        .map(|(k, s)| match window {
            Window::None => *s,
            Window::Hann => *s * (0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()),
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let bin = bin_width(grid);
    let half = n / 2;
    let mut freqs = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    for j in 0..n {
        let m = (j + half) % n;
        let signed = m as i64 - if m >= n - half { n as i64 } else { 0 };
        freqs.push(signed as f64 * bin);
        power.push((buf[m] / n as f64).norm_sqr());
    }
    // `signed` runs -half.. for even n; odd n starts at -(n-1)/2.
    debug_assert!(freqs.windows(2).all(|w| w[0] < w[1]));
    Ok((freqs, power))
}

/// Local maxima above `threshold_ratio · max(power)`, refined by a parabola
/// through the log-power of the three neighbouring bins.
pub fn extract_peaks(frequencies: &[f64], power: &[f64], threshold_ratio: f64) -> Result<Vec<Peak>> {
    let n = power.len();
    if n == 0 || frequencies.len() != n {
        return Err(Error::invalid("spectrum", "empty or mismatched spectrum"));
    }
    if !(threshold_ratio > 0.0 && threshold_ratio < 1.0) {
        return Err(Error::invalid("fid.threshold", "must lie in (0, 1)"));
    }
    let max = power.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 || n < 3 {
        return Ok(Vec::new());
    }
    let bin = if n > 1 { frequencies[1] - frequencies[0] } else { 0.0 };
    let mut peaks = Vec::new();
    for i in 0..n {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        let (a, b, c) = (power[l], power[i], power[r]);
        if !(b > a && b >= c && b > threshold_ratio * max) {
            continue;
        }
        // Roundoff-level neighbours make the log parabola meaningless.
        let (delta, height) = if a.min(c) > 1e-10 * b {
            let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
            let d = parabola_offset(la, lb, lc);
            (d, (lb - 0.25 * (la - lc) * d).exp())
        } else {
            let d = parabola_offset(a, b, c);
            (d, b - 0.25 * (a - c) * d)
        };
        peaks.push(Peak {
            frequency: frequencies[i] + delta * bin,
            amplitude: height,
        });
    }
    peaks.sort_by(|x, y| y.amplitude.total_cmp(&x.amplitude).then(x.frequency.total_cmp(&y.frequency)));
    Ok(peaks)
}

fn parabola_offset(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    }
}

/// One transition `ω_uv = E_u - E_v` with weight `|ρ_uv O_vu|`, summed over
/// pairs sharing the same frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLine {
    pub frequency: f64,
    pub amplitude: f64,
}

/// Transition lines of `Tr[e^{-iHt} ρ e^{iHt} O]` in the eigenbasis of `H`.
/// Lines closer than `merge` are combined.
pub fn gap_lines(spectrum: &Spectrum, rho0: &DensityMatrix, observable: &ComplexMatrix, merge: f64) -> Vec<GapLine> {
    let r = spectrum.to_eigenbasis(rho0.matrix());
    let o = spectrum.to_eigenbasis(observable);
    let e = &spectrum.eigenvalues;
    let mut raw: Vec<(f64, Complex64)> = Vec::with_capacity(e.len() * e.len());
    for u in 0..e.len() {
        for v in 0..e.len() {
            raw.push((e[u] - e[v], r[(u, v)] * o[(v, u)]));
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    // (first frequency of the cluster, summed amplitude, last frequency)
    let mut lines: Vec<(f64, Complex64, f64)> = Vec::new();
    for (w, amp) in raw {
        match lines.last_mut() {
            Some((_, a0, last)) if w - *last <= merge => {
                *a0 += amp;
                *last = w;
            }
            _ => lines.push((w, amp, w)),
        }
    }
    lines
        .into_iter()
        .map(|(w, a, last)| GapLine {
            frequency: 0.5 * (w + last),
            amplitude: a.norm(),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakMatch {
    pub frequency: f64,
    pub amplitude: f64,
    pub gap: f64,
    pub u: usize,
    pub v: usize,
    pub delta: f64,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tolerance: f64,
    pub peaks: Vec<PeakMatch>,
    /// Lines above `floor` times the strongest line with no peak within
    /// tolerance.
    pub missing: Vec<GapLine>,
}

impl MatchReport {
    pub fn all_matched(&self) -> bool {
        self.peaks.iter().all(|p| p.matched)
    }

    pub fn max_delta(&self) -> f64 {
        self.peaks.iter().map(|p| p.delta).fold(0.0, f64::max)
    }
}

/// Matches every peak to the nearest gap `E_u - E_v` of `spectrum`. Only
/// gaps are compared, never absolute energies.
pub fn match_gaps(peaks: &[Peak], spectrum: &Spectrum, tol: f64, lines: &[GapLine], floor: f64) -> MatchReport {
    let e = &spectrum.eigenvalues;
    let mut gaps: Vec<(f64, usize, usize)> = Vec::with_capacity(e.len() * e.len());
    for u in 0..e.len() {
        for v in 0..e.len() {
            gaps.push((e[u] - e[v], u, v));
        }
    }
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nearest = |w: f64| {
        let i = gaps.partition_point(|g| g.0 < w);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|j| gaps.get(j))
            .min_by(|a, b| (a.0 - w).abs().total_cmp(&(b.0 - w).abs()))
            .copied()
    };
    let matches = peaks
        .iter()
        .filter_map(|p| {
            nearest(p.frequency).map(|(g, u, v)| PeakMatch {
                frequency: p.frequency,
                amplitude: p.amplitude,
                gap: g,
                u,
                v,
                delta: (p.frequency - g).abs(),
                matched: (p.frequency - g).abs() <= tol,
            })
        })
        .collect();
    let max_line = lines.iter().map(|l| l.amplitude).fold(0.0, f64::max);
    let missing = lines
        .iter()
        .filter(|l| l.amplitude > floor * max_line)
        .filter(|l| !peaks.iter().any(|p| (p.frequency - l.frequency).abs() <= tol))
        .copied()
        .collect();
    MatchReport {
        tolerance: tol,
        peaks: matches,
        missing,
    }
}

/// Signal, spectrum and peaks for a weighted set of channel Hamiltonians.
pub fn run_fid(
    channels: &[(f64, Hermitian)],
    rho0: &DensityMatrix,
    cfg: &FidConfig,
    exec: Execution,
    tol: &Tolerances,
) -> Result<FidResult> {
    let o = cfg.observable.build(rho0.dim())?;
    let signal = fid_signal(channels, rho0, &o, cfg, exec, tol)?;
    let (frequencies, power) = dft_spectrum(&signal, &cfg.grid, cfg.window)?;
    let peaks = extract_peaks(&frequencies, &power, cfg.threshold)?;
    Ok(FidResult {
        times: cfg.grid.times(),
        signal,
        frequencies,
        power,
        peaks,
        bin_width: cfg.bin_width(),
    })
}
