//! Task orchestration: config → model → ensemble → dressing → readout.

use std::path::PathBuf;

use serde::Serialize;

use dressq::dressing::{dress_ensemble, sample_ensemble, ChannelEnsemble, DressedChannel, DressingMode, EnsembleDescriptor};
use dressq::evolution::{DensityMatrix, TimeGrid};
use dressq::fid::{gap_lines, match_gaps, max_alias_free_dt, run_fid, FidConfig, GapLine, PeakMatch};
use dressq::linalg::{eigh, Hermitian, Spectrum};
use dressq::qpe::{run_generalized_qpe, EnergyEstimate, QpeMode, StateReading};
use dressq::{Execution, Tolerances};

use crate::config::{ExperimentConfig, FidTask, Task};
use crate::error::{CliError, CliResult, KeyContext};
use crate::output::{num, sha256_hex, RunManifest, Sink, Timer, MANIFEST_SCHEMA};
use crate::validate::run_validation;

/// Command-line overrides of config values.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    /// False only when `validate` found a failing check.
    pub passed: bool,
    pub dir: PathBuf,
    pub lines: Vec<String>,
}

/// Everything a task needs after the shared front half of the pipeline.
pub(crate) struct Prepared {
    pub h: Hermitian,
    pub spectrum: Spectrum,
    pub ensemble: ChannelEnsemble,
    pub channels: Vec<DressedChannel>,
}

impl Prepared {
    pub fn weighted(&self) -> Vec<(f64, Hermitian)> {
        self.channels.iter().map(|c| (c.weight, c.hamiltonian.clone())).collect()
    }
}

pub(crate) fn build_ensemble(cfg: &ExperimentConfig, seed: u64, tol: &Tolerances) -> CliResult<ChannelEnsemble> {
    let noiseless = EnsembleDescriptor::Noiseless;
    let desc = match &cfg.ensemble {
        None => &noiseless,
        Some(EnsembleDescriptor::Discrete { channels }) if channels.is_empty() => &noiseless,
        Some(d) => d,
    };
    sample_ensemble(desc, &cfg.model, seed, tol).key("ensemble")
}

pub(crate) fn prepare(
    cfg: &ExperimentConfig,
    seed: u64,
    exec: Execution,
    timer: &mut Timer,
) -> CliResult<Prepared> {
    let tol = &cfg.tolerances;
    let h = timer.time("build_hamiltonian", || cfg.model.build_hamiltonian(tol)).key("model")?;
    let spectrum = timer.time("diagonalize", || eigh(&h, tol)).key("model")?;
    let ensemble = timer.time("sample_ensemble", || build_ensemble(cfg, seed, tol))?;
    let channels = timer
        .time("dress", || dress_ensemble(&h, Some(&cfg.model), &ensemble, cfg.dressing_mode, exec, tol))
        .key("ensemble")?;
    Ok(Prepared {
        h,
        spectrum,
        ensemble,
        channels,
    })
}

/// Runs `f` with the requested worker count.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce(Execution) -> T + Send) -> CliResult<T> {
    if threads == Some(0) {
        return Err(CliError::config("--threads", "must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(1) => Ok(f(Execution::Sequential)),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::config("--threads", e.to_string()))?;
                Ok(pool.install(|| f(Execution::Parallel)))
            }
            None => Ok(f(Execution::Parallel)),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(f(Execution::Sequential))
    }
}

pub fn execute(task: Task, cfg: &ExperimentConfig, config_bytes: &[u8], opts: &RunOptions) -> CliResult<Outcome> {
    cfg.check_task(task)?;
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed {
        cfg.master_seed = s;
    }
    if let Some(d) = &opts.out {
        cfg.output.dir = d.clone();
    }
    cfg.model.validate(&cfg.tolerances).key("model")?;
    let mut sink = Sink::new(&cfg.output)?;
    let mut timer = Timer::default();
    let (passed, lines) = with_threads(opts.threads, |exec| -> CliResult<(bool, Vec<String>)> {
        match task {
            Task::Spectrum => cmd_spectrum(&cfg, exec, &mut sink, &mut timer).map(|l| (true, l)),
            Task::Fid => cmd_fid(&cfg, exec, &mut sink, &mut timer).map(|l| (true, l)),
            Task::Qpe => cmd_qpe(&cfg, exec, &mut sink, &mut timer).map(|l| (true, l)),
            Task::Validate => run_validation(&cfg, exec, &mut sink, &mut timer),
        }
    })??;
    let mut outputs = sink.written().to_vec();
    outputs.push("manifest.json".into());
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        artifact_version: env!("CARGO_PKG_VERSION"),
        task: task.name(),
        config_hash: sha256_hex(config_bytes),
        master_seed: cfg.master_seed,
        threads: opts.threads,
        parallel: cfg!(feature = "parallel") && opts.threads != Some(1),
        timings: timer.into_phases(),
        tolerances: cfg.tolerances.clone(),
        outputs,
    };
    sink.manifest(&manifest)?;
    Ok(Outcome {
        passed,
        dir: sink.dir().to_path_buf(),
        lines,
    })
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    schema: &'static str,
    family: &'static str,
    dimension: usize,
    dressing_mode: DressingMode,
    channels: usize,
    norm: f64,
    max_deviation: f64,
    /// `1e-9 (1 + ‖H‖₂)`.
    bound: f64,
    within_bound: bool,
    noiseless: &'a [f64],
}

/// Largest sorted-eigenvalue deviation of each channel from `reference`.
pub(crate) fn channel_deviations(
    reference: &[f64],
    channels: &[DressedChannel],
    exec: Execution,
    tol: &Tolerances,
) -> CliResult<Vec<(Vec<f64>, f64)>> {
    exec.try_map(channels, |c| {
        let e = eigh(&c.hamiltonian, tol)?.eigenvalues;
        let d = e.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok((e, d))
    })
    .key("ensemble")
}

pub fn cmd_spectrum(cfg: &ExperimentConfig, exec: Execution, sink: &mut Sink, timer: &mut Timer) -> CliResult<Vec<String>> {
    let tol = &cfg.tolerances;
    let p = prepare(cfg, cfg.master_seed, exec, timer)?;
    let reference = &p.spectrum.eigenvalues;
    let per = timer.time("dressed_spectra", || channel_deviations(reference, &p.channels, exec, tol))?;
    let max_deviation = per.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    let norm = p.spectrum.norm();
    let bound = 1e-9 * (1.0 + norm);

    sink.csv(
        "spectrum.csv",
        &["index", "energy"],
        reference.iter().enumerate().map(|(u, e)| vec![u.to_string(), num(*e)]),
    )?;
    let rows = per.iter().zip(&p.channels).enumerate().flat_map(|(a, ((e, d), c))| {
        e.iter()
            .enumerate()
            .map(move |(u, x)| vec![a.to_string(), num(c.weight), u.to_string(), num(*x), num(*d)])
    });
    sink.csv("dressed_spectra.csv", &["channel", "weight", "index", "energy", "deviation"], rows)?;
    sink.json(
        "spectrum.json",
        &SpectrumReport {
            schema: "dressq.spectrum.v1",
            family: cfg.model.family(),
            dimension: p.h.dim(),
            dressing_mode: cfg.dressing_mode,
            channels: p.channels.len(),
            norm,
            max_deviation,
            bound,
            within_bound: max_deviation <= bound,
            noiseless: reference,
        },
    )?;
    Ok(vec![format!(
        "spectrum: {} levels, {} channels, max deviation {max_deviation:.3e} (bound {bound:.3e})",
        reference.len(),
        p.channels.len()
    )])
}

#[derive(Serialize)]
struct FidReport {
    schema: &'static str,
    dt: f64,
    n_samples: usize,
    bin_width: f64,
    match_tolerance: f64,
    all_matched: bool,
    max_delta: f64,
    peaks: Vec<PeakMatch>,
    missing: Vec<GapLine>,
}

pub(crate) fn fid_config(task: &FidTask, spectrum: &Spectrum) -> CliResult<FidConfig> {
    let dt = task
        .dt
        .unwrap_or_else(|| 0.9 * max_alias_free_dt(spectrum.norm(), spectrum.spread()).min(1e6));
    let grid = TimeGrid {
        t_start: task.t_start,
        dt,
        n_samples: task.n_samples,
    };
    let cfg = FidConfig {
        v0: task.v0,
        observable: task.observable.clone(),
        grid,
        window: task.window,
        threshold: task.threshold,
        match_tolerance: task.match_tolerance,
        amplitude_floor: task.amplitude_floor,
    };
    cfg.validate().map_err(prefix_fid)?;
    Ok(cfg)
}

/// Core FID keys are relative to the FID block.
fn prefix_fid(e: dressq::Error) -> CliError {
    match e {
        dressq::Error::InvalidParameter { name, reason } => {
            let rest = name.trim_start_matches("fid.").trim_start_matches("grid.");
            CliError::config(format!("fid.{rest}"), reason)
        }
        other => CliError::Core {
            key: "fid".into(),
            source: other,
        },
    }
}

pub(crate) fn initial_density(task: &FidTask, spectrum: &Spectrum, tol: &Tolerances) -> CliResult<DensityMatrix> {
    let psi = task.initial.state(spectrum, tol).map_err(|e| match e {
        dressq::Error::InvalidParameter { name, reason } => CliError::config(name.replacen("qpe.", "fid.", 1), reason),
        other => CliError::Runtime(other),
    })?;
    DensityMatrix::pure(&psi, tol).key("fid.initial")
}

pub fn cmd_fid(cfg: &ExperimentConfig, exec: Execution, sink: &mut Sink, timer: &mut Timer) -> CliResult<Vec<String>> {
    let tol = &cfg.tolerances;
    let task = cfg.fid.as_ref().ok_or_else(|| CliError::config("fid", "missing [fid] block"))?;
    let p = prepare(cfg, cfg.master_seed, exec, timer)?;
    let fcfg = fid_config(task, &p.spectrum)?;
    let rho0 = initial_density(task, &p.spectrum, tol)?;
    let channels = p.weighted();
    let res = timer.time("fid", || run_fid(&channels, &rho0, &fcfg, exec, tol)).map_err(prefix_fid)?;
    let o = fcfg.observable.build(rho0.dim()).map_err(prefix_fid)?;
    let lines = gap_lines(&p.spectrum, &rho0, &o, 1e-9 * (1.0 + p.spectrum.norm()));
    let match_tol = fcfg.match_tolerance.unwrap_or(res.bin_width);
    let report = match_gaps(&res.peaks, &p.spectrum, match_tol, &lines, fcfg.amplitude_floor);

    sink.csv(
        "fid_signal.csv",
        &["t", "re", "im"],
        res.times.iter().zip(&res.signal).map(|(t, v)| vec![num(*t), num(v.re), num(v.im)]),
    )?;
    sink.csv(
        "fid_spectrum.csv",
        &["omega", "power"],
        res.frequencies.iter().zip(&res.power).map(|(w, p)| vec![num(*w), num(*p)]),
    )?;
    let summary = format!(
        "fid: {} peaks, all matched: {}, max |Δ| {:.3e} (tolerance {:.3e})",
        report.peaks.len(),
        report.all_matched(),
        report.max_delta(),
        match_tol
    );
    sink.json(
        "fid_report.json",
        &FidReport {
            schema: "dressq.fid.v1",
            dt: fcfg.grid.dt,
            n_samples: fcfg.grid.n_samples,
            bin_width: res.bin_width,
            match_tolerance: match_tol,
            all_matched: report.all_matched(),
            max_delta: report.max_delta(),
            peaks: report.peaks,
            missing: report.missing,
        },
    )?;
    Ok(vec![summary])
}

#[derive(Serialize)]
struct QpeSummary<'a> {
    schema: &'static str,
    n_register: usize,
    t_evolution: f64,
    mode: QpeMode,
    reading: StateReading,
    channels: usize,
    noiseless_levels: &'a [f64],
    /// Outcomes with probability above 1e-3, most likely first.
    likely: Vec<EnergyEstimate>,
    per_channel: Option<&'a Vec<Vec<f64>>>,
}

pub fn cmd_qpe(cfg: &ExperimentConfig, exec: Execution, sink: &mut Sink, timer: &mut Timer) -> CliResult<Vec<String>> {
    let tol = &cfg.tolerances;
    let qcfg = cfg.qpe.as_ref().ok_or_else(|| CliError::config("qpe", "missing [qpe] block"))?;
    let p = prepare(cfg, cfg.master_seed, exec, timer)?;
    let res = timer
        .time("qpe", || run_generalized_qpe(&p.h, &p.channels, qcfg, exec, tol))
        .key("qpe")?;
    sink.csv(
        "qpe_histogram.csv",
        &["j", "probability", "energy_estimate"],
        res.energy_estimates
            .iter()
            .map(|e| vec![e.j.to_string(), num(e.probability), num(e.energy)]),
    )?;
    let mut likely: Vec<EnergyEstimate> = res.energy_estimates.iter().copied().filter(|e| e.probability > 1e-3).collect();
    likely.sort_by(|a, b| b.probability.total_cmp(&a.probability).then(a.j.cmp(&b.j)));
    let top = likely.first().copied();
    sink.json(
        "qpe_summary.json",
        &QpeSummary {
            schema: "dressq.qpe.v1",
            n_register: res.n_register,
            t_evolution: res.t_evolution,
            mode: qcfg.mode,
            reading: qcfg.reading,
            channels: p.ensemble.len(),
            noiseless_levels: &p.spectrum.eigenvalues,
            likely,
            per_channel: res.per_channel.as_ref(),
        },
    )?;
    Ok(vec![match top {
        Some(e) => format!(
            "qpe: most likely j = {} (P = {:.4}, E ≈ {:.6}), t = {:.6}",
            e.j, e.probability, e.energy, res.t_evolution
        ),
        None => "qpe: no outcome above 1e-3".to_string(),
    }])
}
