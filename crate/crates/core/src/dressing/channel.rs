use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::Hermitian;
use crate::models::ModelSpec;
use crate::{Error, Result};

/// One static noise realization `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseChannel {
    /// Per-qubit `σᶻ` rotation angles (radians).
    SpinZ { angles: Vec<f64> },
    /// Per-site momentum-shift strengths `a_j` and position-coupling
    /// strengths `a'_j`.
    Oscillator {
        momentum_shift: Vec<f64>,
        position_shift: Vec<f64>,
    },
    /// Spin rotation angle `a₀` and one complex displacement per mode.
    SpinBoson {
        spin_angle: f64,
        displacements: Vec<Complex64>,
    },
    /// Spin-down momentum rotation mixing modes `q' - k` into `q - k` with
    /// weights `g(k)`.
    Bcs {
        q: i64,
        #[serde(default)]
        qprime: i64,
        g: Vec<f64>,
        #[serde(default = "default_bcs_angle")]
        angle: f64,
    },
    /// `V = exp(-iεP)` for an arbitrary Hermitian generator.
    Generic { generator: Hermitian, strength: f64 },
}

fn default_bcs_angle() -> f64 {
    FRAC_PI_2
}

impl NoiseChannel {
    pub fn kind(&self) -> &'static str {
        match self {
            NoiseChannel::SpinZ { .. } => "spin_z",
            NoiseChannel::Oscillator { .. } => "oscillator",
            NoiseChannel::SpinBoson { .. } => "spin_boson",
            NoiseChannel::Bcs { .. } => "bcs",
            NoiseChannel::Generic { .. } => "generic",
        }
    }

    /// The same channel with every noise amplitude multiplied by `eps`.
    pub fn scaled(&self, eps: f64) -> NoiseChannel {
        let mul = |v: &[f64]| v.iter().map(|x| x * eps).collect::<Vec<_>>();
        match self {
            NoiseChannel::SpinZ { angles } => NoiseChannel::SpinZ { angles: mul(angles) },
            NoiseChannel::Oscillator {
                momentum_shift,
                position_shift,
            } => NoiseChannel::Oscillator {
                momentum_shift: mul(momentum_shift),
                position_shift: mul(position_shift),
            },
            NoiseChannel::SpinBoson {
                spin_angle,
                displacements,
            } => NoiseChannel::SpinBoson {
                spin_angle: spin_angle * eps,
                displacements: displacements.iter().map(|a| a * eps).collect(),
            },
            NoiseChannel::Bcs { q, qprime, g, angle } => NoiseChannel::Bcs {
                q: *q,
                qprime: *qprime,
                g: mul(g),
                angle: *angle,
            },
            NoiseChannel::Generic { generator, strength } => NoiseChannel::Generic {
                generator: generator.clone(),
                strength: strength * eps,
            },
        }
    }

    fn finite(&self) -> bool {
        let ok = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            NoiseChannel::SpinZ { angles } => ok(angles),
            NoiseChannel::Oscillator {
                momentum_shift,
                position_shift,
            } => ok(momentum_shift) && ok(position_shift),
            NoiseChannel::SpinBoson {
                spin_angle,
                displacements,
            } => spin_angle.is_finite() && displacements.iter().all(|a| a.re.is_finite() && a.im.is_finite()),
            NoiseChannel::Bcs { g, angle, .. } => ok(g) && angle.is_finite(),
            NoiseChannel::Generic { strength, .. } => strength.is_finite(),
        }
    }

    /// Checks that the channel's variant and parameter lengths fit `model`.
    pub fn check_compatible(&self, model: &ModelSpec) -> Result<()> {
        if !self.finite() {
            return Err(Error::invalid("channel", "parameters must be finite"));
        }
        let len_err = |key: &str, want: usize, got: usize| {
            Err(Error::invalid(key, format!("expected {want} entries, got {got}")))
        };
        match (self, model) {
            (NoiseChannel::Generic { generator, .. }, m) => {
                if generator.dim() != m.dimension() {
                    return Err(Error::DimensionMismatch {
                        expected: m.dimension(),
                        found: generator.dim(),
                    });
                }
            }
            (NoiseChannel::SpinZ { angles }, ModelSpec::Spin(s)) => {
                if angles.len() != s.n_qubits {
                    return len_err("channel.angles", s.n_qubits, angles.len());
                }
            }
            (
                NoiseChannel::Oscillator {
                    momentum_shift,
                    position_shift,
                },
                ModelSpec::Oscillator(s),
            ) => {
                if momentum_shift.len() != s.n_sites() {
                    return len_err("channel.momentum_shift", s.n_sites(), momentum_shift.len());
                }
                if position_shift.len() != s.n_sites() {
                    return len_err("channel.position_shift", s.n_sites(), position_shift.len());
                }
            }
            (NoiseChannel::SpinBoson { displacements, .. }, ModelSpec::SpinBoson(s)) => {
                if displacements.len() != s.modes.len() {
                    return len_err("channel.displacements", s.modes.len(), displacements.len());
                }
            }
            (NoiseChannel::Bcs { q, qprime, g, .. }, ModelSpec::Bcs(s)) => {
                let l = s.momenta() as i64;
                if g.len() != s.momenta() {
                    return len_err("channel.g", s.momenta(), g.len());
                }
                if (q - qprime).rem_euclid(l) == 0 {
                    return Err(Error::invalid(
                        "channel.q",
                        format!("q = {q} and qprime = {qprime} coincide mod {l}; the generator vanishes"),
                    ));
                }
            }
            (c, m) => {
                return Err(Error::IncompatibleChannel {
                    channel: c.kind(),
                    family: m.family(),
                })
            }
        }
        Ok(())
    }
}
