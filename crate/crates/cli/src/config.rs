//! TOML experiment configuration. One annotated example per task lives in
//! `configs/`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dressq::dressing::{DressingMode, EnsembleDescriptor};
use dressq::fid::{Observable, Window};
use dressq::models::ModelSpec;
use dressq::qpe::{InitialState, QpeConfig};
use dressq::Tolerances;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Spectrum,
    Fid,
    Qpe,
    Validate,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Fid => "fid",
            Task::Qpe => "qpe",
            Task::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must match the subcommand.
    #[serde(default)]
    pub task: Option<Task>,
    pub model: ModelSpec,
    /// Absent or an empty discrete list means the noiseless baseline.
    #[serde(default)]
    pub ensemble: Option<EnsembleDescriptor>,
    #[serde(default)]
    pub dressing_mode: DressingMode,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub fid: Option<FidTask>,
    #[serde(default)]
    pub qpe: Option<QpeConfig>,
    #[serde(default)]
    pub validate: ValidateTask,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}

fn five_percent() -> f64 {
    0.05
}

fn quarter() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidTask {
    pub n_samples: usize,
    /// Sample spacing; `0.9 π / max(‖H‖₂, E_max - E_min)` when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "one")]
    pub v0: f64,
    #[serde(default)]
    pub observable: Observable,
    #[serde(default)]
    pub window: Window,
    #[serde(default = "five_percent")]
    pub threshold: f64,
    /// Peak-to-gap tolerance; one DFT bin when absent.
    #[serde(default)]
    pub match_tolerance: Option<f64>,
    #[serde(default = "quarter")]
    pub amplitude_floor: f64,
    /// Initial pure state `ρ0 = |ψ⟩⟨ψ|`.
    #[serde(default)]
    pub initial: InitialState,
}

/// Sizes used by `validate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateTask {
    /// Ensemble used when the config's own ensemble is noiseless.
    pub channels: usize,
    pub sigma: f64,
    pub fid_samples: usize,
    pub qpe_register: usize,
}

impl Default for ValidateTask {
    fn default() -> Self {
        Self {
            channels: 20,
            sigma: 0.1,
            fid_samples: 2048,
            qpe_register: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: true,
            json: true,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::config("<toml>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { "<root>".to_string() } else { key };
            CliError::config(key, e.into_inner().message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> CliResult<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::config("<file>", e.to_string()))?;
        Ok((Self::parse(text)?, bytes))
    }

    /// Checks that `task` agrees with the subcommand and that the block the
    /// task needs is present.
    pub fn check_task(&self, task: Task) -> CliResult<()> {
        if let Some(t) = self.task {
            if t != task {
                return Err(CliError::config(
                    "task",
                    format!("config is for `{}` but `{}` was requested", t.name(), task.name()),
                ));
            }
        }
        match task {
            Task::Fid if self.fid.is_none() => Err(CliError::config("fid", "the fid task needs a [fid] block")),
            Task::Qpe if self.qpe.is_none() => Err(CliError::config("qpe", "the qpe task needs a [qpe] block")),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPIN: &str = r#"
        [model]
        family = "spin"
        n_qubits = 2
        field = 0.5
        cost = { kind = "ising", h = [0.1, 0.2] }
    "#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::parse(SPIN).unwrap();
        assert_eq!(c.master_seed, 0);
        assert!(c.ensemble.is_none());
        assert_eq!(c.dressing_mode, DressingMode::Exact);
        assert_eq!(c.output.dir, PathBuf::from("out"));
        assert!(c.check_task(Task::Spectrum).is_ok());
        assert!(c.check_task(Task::Fid).is_err());
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = format!("{SPIN}\n[output]\ndirectory = \"x\"\n");
        let CliError::Config { key, message } = ExperimentConfig::parse(&text).unwrap_err() else {
            panic!()
        };
        assert_eq!(key, "output.directory");
        assert!(message.contains("unknown field"), "{message}");
        let text = format!("master_seed = \"x\"\n{SPIN}");
        let CliError::Config { key, .. } = ExperimentConfig::parse(&text).unwrap_err() else {
            panic!()
        };
        assert_eq!(key, "master_seed");
    }

    #[test]
    fn nested_keys_are_named() {
        let text = format!("{SPIN}\n[fid]\nn_samples = -3\n");
        let CliError::Config { key, .. } = ExperimentConfig::parse(&text).unwrap_err() else {
            panic!()
        };
        assert_eq!(key, "fid.n_samples");
    }

    #[test]
    fn task_must_match_subcommand() {
        let text = format!("task = \"qpe\"\n{SPIN}");
        let c = ExperimentConfig::parse(&text).unwrap();
        let CliError::Config { key, .. } = c.check_task(Task::Fid).unwrap_err() else {
            panic!()
        };
        assert_eq!(key, "task");
    }
}
