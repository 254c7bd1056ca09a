//! The `validate` task: every invariant checked on the configured model.
//! Failures are results, not errors.

use std::f64::consts::PI;

use serde::Serialize;

use dressq::dressing::{
    bcs_structure, converged_block, dress_ensemble, first_order_residual, ChannelEnsemble,
    Distribution, DressedChannel, DressingMode, EnsembleDescriptor,
};
use dressq::evolution::{evolve_averaged, DensityMatrix, TimeGrid};
use dressq::fid::{fid_signal, gap_lines, match_gaps, run_fid, Observable};
use dressq::linalg::{eigh, spectral_norm, Hermitian, Spectrum};
use dressq::models::ModelSpec;
use dressq::qpe::{run_generalized_qpe, QpeConfig, QpeMode, StateReading, MAX_CIRCUIT_AMPLITUDES, MAX_CIRCUIT_REGISTER};
use dressq::{Execution, Tolerances};

use crate::config::{ExperimentConfig, FidTask};
use crate::error::CliResult;
use crate::output::{Sink, Timer};
use crate::run::{build_ensemble, fid_config};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub detail: String,
}

impl Check {
    fn bounded(name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            status: if value <= bound { Status::Pass } else { Status::Fail },
            value: Some(value),
            bound: Some(bound),
            detail: String::new(),
        }
    }

    fn flag(name: &'static str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            value: None,
            bound: None,
            detail: detail.into(),
        }
    }

    fn skip(name: &'static str, why: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skip,
            value: None,
            bound: None,
            detail: why.into(),
        }
    }

    fn failed(name: &'static str, err: impl std::fmt::Display) -> Self {
        Self::flag(name, false, err.to_string())
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let mut s = format!("{tag} {}", self.name);
        if let Some(v) = self.value {
            s.push_str(&format!(" value={v:.3e}"));
        }
        if let Some(b) = self.bound {
            s.push_str(&format!(" bound={b:.3e}"));
        }
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    schema: &'static str,
    family: &'static str,
    passed: bool,
    checks: &'a [Check],
}

/// Largest dimension for which per-time eigendecompositions are affordable.
const MAX_EVOLUTION_DIM: usize = 512;

struct Context<'a> {
    model: &'a ModelSpec,
    tol: &'a Tolerances,
    exec: Execution,
    h: Hermitian,
    spectrum: Spectrum,
    ensemble: ChannelEnsemble,
}

fn ensemble_for_validation(cfg: &ExperimentConfig, tol: &Tolerances) -> CliResult<ChannelEnsemble> {
    let configured = matches!(
        &cfg.ensemble,
        Some(EnsembleDescriptor::Sampled { .. }) | Some(EnsembleDescriptor::Discrete { channels: _ })
    ) && !matches!(&cfg.ensemble, Some(EnsembleDescriptor::Discrete { channels }) if channels.is_empty());
    if configured {
        return build_ensemble(cfg, cfg.master_seed, tol);
    }
    let desc = EnsembleDescriptor::Sampled {
        distribution: Distribution::Gaussian {
            sigma: cfg.validate.sigma,
        },
        count: cfg.validate.channels,
        shape: None,
    };
    let mut c = cfg.clone();
    c.ensemble = Some(desc);
    build_ensemble(&c, cfg.master_seed, tol)
}

pub fn run_validation(
    cfg: &ExperimentConfig,
    exec: Execution,
    sink: &mut Sink,
    timer: &mut Timer,
) -> CliResult<(bool, Vec<String>)> {
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    let setup = (|| -> Result<Context, String> {
        let h = cfg.model.build_hamiltonian(tol).map_err(|e| e.to_string())?;
        let spectrum = eigh(&h, tol).map_err(|e| e.to_string())?;
        let ensemble = ensemble_for_validation(cfg, tol).map_err(|e| e.to_string())?;
        Ok(Context {
            model: &cfg.model,
            tol,
            exec,
            h,
            spectrum,
            ensemble,
        })
    })();
    match setup {
        Err(e) => checks.push(Check::failed("setup", e)),
        Ok(ctx) => timer.time("validate", || run_checks(&ctx, cfg, &mut checks)),
    }
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    sink.json(
        "validation.json",
        &ValidationReport {
            schema: "dressq.validation.v1",
            family: cfg.model.family(),
            passed,
            checks: &checks,
        },
    )?;
    let mut lines: Vec<String> = checks.iter().map(Check::line).collect();
    lines.push(format!("validation {}", if passed { "passed" } else { "FAILED" }));
    Ok((passed, lines))
}

fn run_checks(ctx: &Context, cfg: &ExperimentConfig, out: &mut Vec<Check>) {
    out.push(hamiltonian_hermitian(ctx));
    let dressed = dress_ensemble(&ctx.h, Some(ctx.model), &ctx.ensemble, DressingMode::Exact, ctx.exec, ctx.tol);
    match &dressed {
        Ok(d) => {
            out.push(unitarity(ctx, d));
            out.push(spectral_invariance(ctx, d));
        }
        Err(e) => {
            out.push(Check::failed("dressing.unitarity", e));
            out.push(Check::failed("dressing.spectral_invariance", e));
        }
    }
    out.push(first_order(ctx));
    out.push(determinism(ctx, cfg));
    match &dressed {
        Ok(d) => {
            let channels: Vec<(f64, Hermitian)> = d.iter().map(|c| (c.weight, c.hamiltonian.clone())).collect();
            out.push(evolution(ctx, &channels));
            out.extend(fid(ctx, cfg, &channels));
            out.extend(qpe(ctx, cfg, d));
        }
        Err(e) => {
            for name in ["evolution.state_validity", "fid.gap_match", "qpe.support_reexpanded"] {
                out.push(Check::failed(name, e));
            }
        }
    }
    out.push(bcs(ctx));
}

fn hamiltonian_hermitian(ctx: &Context) -> Check {
    let m = ctx.h.matrix();
    Check::bounded(
        "hamiltonian.hermitian",
        m.hermiticity_defect(),
        ctx.tol.hermitian_rel * m.max_abs().max(1.0),
    )
}

fn unitarity(ctx: &Context, d: &[DressedChannel]) -> Check {
    let worst = d
        .iter()
        .filter_map(|c| c.unitary.as_ref())
        .map(|u| u.matrix().unitarity_defect())
        .fold(0.0, f64::max);
    Check::bounded("dressing.unitarity", worst, ctx.tol.unitary)
}

fn spectral_invariance(ctx: &Context, d: &[DressedChannel]) -> Check {
    let reference = &ctx.spectrum.eigenvalues;
    let devs = ctx.exec.try_map(d, |c| {
        eigh(&c.hamiltonian, ctx.tol).map(|s| {
            s.eigenvalues
                .iter()
                .zip(reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    });
    match devs {
        Ok(v) => Check::bounded(
            "dressing.spectral_invariance",
            v.into_iter().fold(0.0, f64::max),
            1e-9 * (1.0 + ctx.spectrum.norm()),
        )
        .detail(format!("{} exact channels", d.len())),
        Err(e) => Check::failed("dressing.spectral_invariance", e),
    }
}

fn first_order(ctx: &Context) -> Check {
    const NAME: &str = "dressing.first_order_quadratic";
    let Some(entry) = ctx.ensemble.entries().first() else {
        return Check::skip(NAME, "empty ensemble");
    };
    let keep = converged_block(ctx.model);
    let ratios: Result<Vec<f64>, _> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&e| first_order_residual(&ctx.h, &entry.channel, Some(ctx.model), e, &keep, ctx.tol))
        .collect();
    match ratios {
        Err(e) => Check::failed(NAME, e),
        Ok(r) => {
            let (lo, hi) = r.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            if hi < 1e-12 {
                return Check::skip(NAME, "first channel commutes with H");
            }
            Check::bounded(NAME, hi / lo, 2.0).detail(format!("ratios {}", r.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")))
        }
    }
}

fn determinism(ctx: &Context, cfg: &ExperimentConfig) -> Check {
    const NAME: &str = "sampling.determinism";
    match (ensemble_for_validation(cfg, ctx.tol), ensemble_for_validation(cfg, ctx.tol)) {
        (Ok(a), Ok(b)) => Check::flag(NAME, a == b && a == ctx.ensemble, "same seed, same ensemble"),
        (Err(e), _) | (_, Err(e)) => Check::failed(NAME, e),
    }
}

fn evolution(ctx: &Context, channels: &[(f64, Hermitian)]) -> Check {
    const NAME: &str = "evolution.state_validity";
    let d = ctx.h.dim();
    if d > MAX_EVOLUTION_DIM {
        return Check::skip(NAME, format!("dimension {d} > {MAX_EVOLUTION_DIM}"));
    }
    let dt = 0.5 * PI / ctx.spectrum.norm().max(1e-12);
    let run = || -> dressq::Result<f64> {
        let grid = TimeGrid::new(0.0, dt, 6)?;
        let rho0 = DensityMatrix::uniform_superposition(d);
        let mut worst: f64 = 0.0;
        for rho in evolve_averaged(channels, &rho0, &grid, ctx.exec, ctx.tol)? {
            let m = rho.matrix();
            worst = worst.max((m.trace().re - 1.0).abs()).max(m.hermiticity_defect());
            let h = Hermitian::symmetrize(m)?;
            let min = eigh(&h, ctx.tol)?.eigenvalues.first().copied().unwrap_or(0.0);
            worst = worst.max(-min).max(rho.purity() - 1.0);
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Check::bounded(NAME, w, ctx.tol.density.max(ctx.tol.positivity))
            .detail("trace, Hermiticity, positivity, purity ≤ 1"),
        Err(e) => Check::failed(NAME, e),
    }
}

fn fid(ctx: &Context, cfg: &ExperimentConfig, channels: &[(f64, Hermitian)]) -> Vec<Check> {
    let d = ctx.h.dim();
    let task = cfg.fid.clone().unwrap_or(FidTask {
        n_samples: cfg.validate.fid_samples,
        dt: None,
        t_start: 0.0,
        v0: 1.0,
        observable: Observable::default(),
        window: Default::default(),
        threshold: 0.05,
        match_tolerance: None,
        amplitude_floor: 0.25,
        initial: Default::default(),
    });
    if matches!(task.observable, Observable::Ladder { .. }) && !d.is_power_of_two() {
        return vec![Check::skip("fid.gap_match", format!("ladder observable needs a qubit register, dimension {d}"))];
    }
    let fcfg = match fid_config(&task, &ctx.spectrum) {
        Ok(c) => c,
        Err(e) => return vec![Check::failed("fid.gap_match", e)],
    };
    let rho0 = DensityMatrix::uniform_superposition(d);
    let run = || -> dressq::Result<Vec<Check>> {
        let res = run_fid(channels, &rho0, &fcfg, ctx.exec, ctx.tol)?;
        let o = fcfg.observable.build(d)?;
        let lines = gap_lines(&ctx.spectrum, &rho0, &o, 1e-9 * (1.0 + ctx.spectrum.norm()));
        let tol = fcfg.match_tolerance.unwrap_or(res.bin_width);
        let report = match_gaps(&res.peaks, &ctx.spectrum, tol, &lines, fcfg.amplitude_floor);
        let bound = fcfg.v0.abs() * spectral_norm(&o, ctx.tol)? * (1.0 + 1e-12);
        let biggest = res.signal.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let seq = fid_signal(channels, &rho0, &o, &fcfg, Execution::Sequential, ctx.tol)?;
        Ok(vec![
            Check::bounded("fid.gap_match", report.max_delta(), tol)
                .detail(format!("{} peaks, all matched: {}", report.peaks.len(), report.all_matched())),
            Check::bounded("fid.signal_bound", biggest, bound),
            Check::flag("fid.sequential_parallel", seq == res.signal, "bitwise identical signals"),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("fid.gap_match", e)])
}

fn qpe(ctx: &Context, cfg: &ExperimentConfig, d: &[DressedChannel]) -> Vec<Check> {
    let mut qcfg = cfg.qpe.clone().unwrap_or_else(|| QpeConfig::new(cfg.validate.qpe_register));
    qcfg.mode = QpeMode::Kernel;
    qcfg.keep_per_channel = false;
    let n = qcfg.n_register;
    let dim = ctx.h.dim();
    let mut out = Vec::new();
    for (name, reading) in [
        ("qpe.support_reexpanded", StateReading::Reexpanded),
        ("qpe.support_dressed", StateReading::Dressed),
    ] {
        qcfg.reading = reading;
        match run_generalized_qpe(&ctx.h, d, &qcfg, ctx.exec, ctx.tol) {
            Err(e) => out.push(Check::failed(name, e)),
            Ok(r) => {
                let bin = 2.0 * PI / ((1u64 << n) as f64 * r.t_evolution.abs());
                let worst = r
                    .energy_estimates
                    .iter()
                    .filter(|e| e.probability > 0.05)
                    .map(|e| {
                        ctx.spectrum
                            .eigenvalues
                            .iter()
                            .map(|x| (x - e.energy).abs())
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max);
                let sum: f64 = r.histogram.iter().sum();
                out.push(
                    Check::bounded(name, worst, bin)
                        .detail(format!("outcomes with P > 0.05 vs nearest level; Σ P = {sum:.12}")),
                );
            }
        }
    }
    const NAME: &str = "qpe.kernel_circuit";
    if n > MAX_CIRCUIT_REGISTER || (1usize << n) * dim > MAX_CIRCUIT_AMPLITUDES {
        out.push(Check::skip(NAME, "statevector too large"));
        return out;
    }
    qcfg.reading = StateReading::Reexpanded;
    let kernel = run_generalized_qpe(&ctx.h, d, &qcfg, ctx.exec, ctx.tol);
    qcfg.mode = QpeMode::Circuit;
    let circuit = run_generalized_qpe(&ctx.h, d, &qcfg, ctx.exec, ctx.tol);
    out.push(match (kernel, circuit) {
        (Ok(k), Ok(c)) => {
            let diff = k
                .histogram
                .iter()
                .zip(&c.histogram)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Check::bounded(NAME, diff, 1e-9)
        }
        (Err(e), _) | (_, Err(e)) => Check::failed(NAME, e),
    });
    out
}

fn bcs(ctx: &Context) -> Check {
    const NAME: &str = "bcs.structure";
    let ModelSpec::Bcs(spec) = ctx.model else {
        return Check::skip(NAME, "not a pairing model");
    };
    let l = spec.momenta();
    let q = match l {
        2 | 3 => 1,
        l if l % 2 == 0 => l as i64 / 2,
        _ => return Check::skip(NAME, format!("no single-rotation translation for L = {l}")),
    };
    match bcs_structure(spec, q, ctx.tol) {
        Ok(s) => Check::bounded(NAME, s.kinetic.max(s.hamiltonian).max(s.spectrum), 1e-9)
            .detail(format!("L = {l}, q = {q}: kinetic, H_q and spectrum")),
        Err(e) => Check::failed(NAME, e),
    }
}
