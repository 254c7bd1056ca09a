use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::channel::NoiseChannel;
use crate::linalg::Hermitian;
use crate::models::ModelSpec;
use crate::{Error, Result, Tolerances};

/// Per-scalar noise distribution for sampled ensembles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Gaussian { sigma: f64 },
    Uniform { half_width: f64 },
}

impl Distribution {
    fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::invalid("ensemble.distribution.sigma", "must be finite and nonnegative"))
            }
            Distribution::Uniform { half_width } if !(half_width >= 0.0 && half_width.is_finite()) => Err(
                Error::invalid("ensemble.distribution.half_width", "must be finite and nonnegative"),
            ),
            _ => Ok(()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Distribution::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Distribution::Uniform { half_width } => half_width * rng.random_range(-1.0..=1.0),
        }
    }
}

/// Which channel variant a sampler fills, with its non-random parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelShape {
    SpinZ,
    Oscillator,
    SpinBoson,
    /// Samples `g(k)`; `q`, `qprime` and `angle` are fixed.
    Bcs {
        #[serde(default = "default_q")]
        q: i64,
        #[serde(default)]
        qprime: i64,
        #[serde(default = "default_angle")]
        angle: f64,
    },
    /// Samples the strength `ε` of a fixed generator.
    Generic { generator: Hermitian },
}

fn default_q() -> i64 {
    1
}

fn default_angle() -> f64 {
    FRAC_PI_2
}

impl ChannelShape {
    /// The natural channel variant for a model family.
    pub fn for_model(model: &ModelSpec) -> ChannelShape {
        match model {
            ModelSpec::Spin(_) => ChannelShape::SpinZ,
            ModelSpec::Oscillator(_) => ChannelShape::Oscillator,
            ModelSpec::SpinBoson(_) => ChannelShape::SpinBoson,
            ModelSpec::Bcs(_) => ChannelShape::Bcs {
                q: default_q(),
                qprime: 0,
                angle: default_angle(),
            },
        }
    }

    /// Builds a channel for `model`, drawing every random scalar from `draw`.
    pub fn realize(&self, model: &ModelSpec, mut draw: impl FnMut() -> f64) -> Result<NoiseChannel> {
        let mut vec = |n: usize| (0..n).map(|_| draw()).collect::<Vec<f64>>();
        let channel = match (self, model) {
            (ChannelShape::SpinZ, ModelSpec::Spin(s)) => NoiseChannel::SpinZ {
                angles: vec(s.n_qubits),
            },
            (ChannelShape::Oscillator, ModelSpec::Oscillator(s)) => NoiseChannel::Oscillator {
                momentum_shift: vec(s.n_sites()),
                position_shift: vec(s.n_sites()),
            },
            (ChannelShape::SpinBoson, ModelSpec::SpinBoson(s)) => {
                let raw = vec(1 + 2 * s.modes.len());
                NoiseChannel::SpinBoson {
                    spin_angle: raw[0],
                    displacements: raw[1..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect(),
                }
            }
            (ChannelShape::Bcs { q, qprime, angle }, ModelSpec::Bcs(s)) => NoiseChannel::Bcs {
                q: *q,
                qprime: *qprime,
                g: vec(s.momenta()),
                angle: *angle,
            },
            (ChannelShape::Generic { generator }, _) => NoiseChannel::Generic {
                generator: generator.clone(),
                strength: vec(1)[0],
            },
            (shape, m) => {
                return Err(Error::IncompatibleChannel {
                    channel: shape.kind(),
                    family: m.family(),
                })
            }
        };
        channel.check_compatible(model)?;
        Ok(channel)
    }

    fn kind(&self) -> &'static str {
        match self {
            ChannelShape::SpinZ => "spin_z",
            ChannelShape::Oscillator => "oscillator",
            ChannelShape::SpinBoson => "spin_boson",
            ChannelShape::Bcs { .. } => "bcs",
            ChannelShape::Generic { .. } => "generic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedChannel {
    pub weight: f64,
    pub channel: NoiseChannel,
}

/// How an ensemble is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleDescriptor {
    /// `count` i.i.d. channels with equal weights.
    Sampled {
        distribution: Distribution,
        count: usize,
        #[serde(default)]
        shape: Option<ChannelShape>,
    },
    /// An explicit list with given weights.
    Discrete { channels: Vec<WeightedChannel> },
    /// One channel with every amplitude zero.
    Noiseless,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Explicit,
    Sampled { descriptor: EnsembleDescriptor, master_seed: u64 },
}

/// Weighted channels `{(p_a, a)}` with `Σ p_a = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelEnsemble {
    entries: Vec<WeightedChannel>,
    provenance: Provenance,
}

impl ChannelEnsemble {
    pub fn new(entries: Vec<WeightedChannel>, tol: &Tolerances) -> Result<Self> {
        Self::with_provenance(entries, Provenance::Explicit, tol)
    }

    fn with_provenance(entries: Vec<WeightedChannel>, provenance: Provenance, tol: &Tolerances) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("ensemble", "needs at least one channel"));
        }
        if entries.iter().any(|e| !(e.weight >= 0.0 && e.weight.is_finite())) {
            return Err(Error::invalid("ensemble.weight", "weights must be finite and nonnegative"));
        }
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if (total - 1.0).abs() > tol.weights {
            return Err(Error::invalid(
                "ensemble.weight",
                format!("weights sum to {total}, not 1"),
            ));
        }
        Ok(Self { entries, provenance })
    }

    /// The single zero-amplitude channel for `model`.
    pub fn noiseless(model: &ModelSpec, tol: &Tolerances) -> Result<Self> {
        let channel = match model {
            // One momentum leaves no room for q != q'.
            ModelSpec::Bcs(s) if s.momenta() == 1 => NoiseChannel::Generic {
                generator: Hermitian::zeros(model.dimension()),
                strength: 0.0,
            },
            _ => ChannelShape::for_model(model).realize(model, || 0.0)?,
        };
        Self::new(vec![WeightedChannel { weight: 1.0, channel }], tol)
    }

    pub fn entries(&self) -> &[WeightedChannel] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Every channel with its amplitudes multiplied by `eps`; weights unchanged.
    pub fn scaled(&self, eps: f64) -> ChannelEnsemble {
        ChannelEnsemble {
            entries: self
                .entries
                .iter()
                .map(|e| WeightedChannel {
                    weight: e.weight,
                    channel: e.channel.scaled(eps),
                })
                .collect(),
            provenance: Provenance::Explicit,
        }
    }
}

/// Builds the ensemble described by `descriptor` for `model`.
///
/// Entry `i` of a sampled ensemble draws from its own ChaCha stream `i` of
/// `master_seed`, so entries do not depend on the count or on each other.
pub fn sample_ensemble(
    descriptor: &EnsembleDescriptor,
    model: &ModelSpec,
    master_seed: u64,
    tol: &Tolerances,
) -> Result<ChannelEnsemble> {
    match descriptor {
        EnsembleDescriptor::Noiseless => ChannelEnsemble::noiseless(model, tol),
        EnsembleDescriptor::Discrete { channels } => {
            for c in channels {
                c.channel.check_compatible(model)?;
            }
            ChannelEnsemble::new(channels.clone(), tol)
        }
        EnsembleDescriptor::Sampled {
            distribution,
            count,
            shape,
        } => {
            distribution.validate()?;
            if *count == 0 {
                return Err(Error::invalid("ensemble.count", "must be at least 1"));
            }
            let shape = shape.clone().unwrap_or_else(|| ChannelShape::for_model(model));
            let weight = 1.0 / *count as f64;
            let entries = (0..*count)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
                    rng.set_stream(i as u64);
                    let channel = shape.realize(model, || distribution.draw(&mut rng))?;
                    Ok(WeightedChannel { weight, channel })
                })
                .collect::<Result<Vec<_>>>()?;
            ChannelEnsemble::with_provenance(
                entries,
                Provenance::Sampled {
                    descriptor: descriptor.clone(),
                    master_seed,
                },
                tol,
            )
        }
    }
}
