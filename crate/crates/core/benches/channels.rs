//! Sequential vs rayon execution of the per-channel loops.
//!
//! Run with: cargo bench -p dressq --bench channels
//! Build with `--no-default-features` to see both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dressq::dressing::{dress_ensemble, sample_ensemble, DressingMode, Distribution, EnsembleDescriptor};
use dressq::evolution::{evolve_averaged, DensityMatrix, TimeGrid};
use dressq::fid::{fid_signal, FidConfig, Observable};
use dressq::linalg::Hermitian;
use dressq::models::{Coupling, CostTerm, ModelSpec, SpinModelSpec};
use dressq::{Execution, Tolerances};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ising(n: usize) -> ModelSpec {
    ModelSpec::Spin(SpinModelSpec {
        n_qubits: n,
        field: 0.7,
        cost: CostTerm::Ising {
            h: (0..n).map(|i| 0.3 - 0.1 * i as f64).collect(),
            couplings: (0..n - 1).map(|i| Coupling { i, j: i + 1, value: 0.8 }).collect(),
        },
    })
}

fn channels(model: &ModelSpec, count: usize, tol: &Tolerances) -> (Hermitian, Vec<(f64, Hermitian)>) {
    let h = model.build_hamiltonian(tol).unwrap();
    let desc = EnsembleDescriptor::Sampled {
        distribution: Distribution::Gaussian { sigma: 0.1 },
        count,
        shape: None,
    };
    let ens = sample_ensemble(&desc, model, 7, tol).unwrap();
    let dressed = dress_ensemble(&h, Some(model), &ens, DressingMode::Exact, Execution::Sequential, tol).unwrap();
    (h, dressed.into_iter().map(|c| (c.weight, c.hamiltonian)).collect())
}

fn bench_dressing(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("dress_ensemble");
    for n in [4, 6] {
        let model = ising(n);
        let h = model.build_hamiltonian(&tol).unwrap();
        let desc = EnsembleDescriptor::Sampled {
            distribution: Distribution::Gaussian { sigma: 0.3 },
            count: 64,
            shape: None,
        };
        let ens = sample_ensemble(&desc, &model, 1, &tol).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| dress_ensemble(black_box(&h), Some(&model), &ens, DressingMode::FirstOrder, exec, &tol).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_evolution(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("evolve_averaged");
    group.sample_size(10);
    let model = ising(4);
    let (_, chans) = channels(&model, 32, &tol);
    let rho0 = DensityMatrix::uniform_superposition(16);
    let grid = TimeGrid::new(0.0, 0.05, 256).unwrap();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| evolve_averaged(black_box(&chans), &rho0, &grid, exec, &tol).unwrap()));
    }
    group.finish();
}

fn bench_fid(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("fid_signal");
    group.sample_size(10);
    let model = ising(3);
    let (_, chans) = channels(&model, 20, &tol);
    let rho0 = DensityMatrix::uniform_superposition(8);
    let cfg = FidConfig::new(TimeGrid::new(0.0, 0.2, 2048).unwrap());
    let o = Observable::default().build(8).unwrap();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| fid_signal(black_box(&chans), &rho0, &o, &cfg, exec, &tol).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_dressing, bench_evolution, bench_fid);
criterion_main!(benches);
