//! Experiment runner behind the `qdrqn` binary: one model on one
//! observability setting, with CSV, JSON and SVG artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cartpole::EnvConfig;
use crate::drqn::{train_with, EpisodeLog, RunLog, TrainConfig};
use crate::error::{Error, Result};
use crate::plot::reward_curve_svg;
use crate::recurrent::{count_parameters, DressedModel, ModelKind};

pub const SCORES_FILE: &str = "scores.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const CURVE_FILE: &str = "reward_curve.svg";
pub const CURVE_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observability {
    Full,
    Partial,
}

impl Observability {
    pub fn obs_dim(self) -> usize {
        match self {
            Observability::Full => 4,
            Observability::Partial => 3,
        }
    }
}

impl fmt::Display for Observability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observability::Full => "full",
            Observability::Partial => "partial",
        })
    }
}

impl FromStr for Observability {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Observability::Full),
            "partial" => Ok(Observability::Partial),
            _ => Err(Error::Config(format!(
                "unknown observability '{s}' (expected full or partial)"
            ))),
        }
    }
}

/// Fully resolved description of one run; serialized as `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelKind,
    pub observability: Observability,
    pub train: TrainConfig,
    pub env: EnvConfig,
}

impl ExperimentSpec {
    /// Defaults for `model` on `observability`; 1000 episodes.
    pub fn new(model: ModelKind, observability: Observability) -> Self {
        Self {
            model,
            observability,
            train: TrainConfig::default(),
            env: EnvConfig {
                partial_observation: observability == Observability::Partial,
                ..EnvConfig::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.env.partial_observation != (self.observability == Observability::Partial) {
            return Err(Error::Config(format!(
                "env.partial_observation = {} contradicts observability '{}'",
                self.env.partial_observation, self.observability
            )));
        }
        self.train.validate()?;
        self.env.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let spec: Self = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn parameter_count(&self) -> Result<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.train.seed);
        Ok(count_parameters(&DressedModel::new(
            self.model,
            self.observability.obs_dim(),
            &mut rng,
        )?))
    }
}

/// Trains per `spec` and writes `scores.csv`, `config.json` and
/// `reward_curve.svg` into `out_dir`.
pub fn run_experiment<F: FnMut(&EpisodeLog)>(spec: &ExperimentSpec, out_dir: &Path, on_episode: F) -> Result<RunLog> {
    spec.validate()?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(CONFIG_FILE), spec.to_json())?;
    let log = train_with(&spec.train, spec.model, &spec.env, on_episode)?;
    fs::write(out_dir.join(SCORES_FILE), log.to_csv())?;
    let title = format!(
        "{} / {} observation, seed {}",
        spec.model, spec.observability, spec.train.seed
    );
    fs::write(
        out_dir.join(CURVE_FILE),
        reward_curve_svg(&title, &log.scores(), CURVE_WINDOW),
    )?;
    Ok(log)
}

/// Published parameter counts, per model and observability.
pub const PARAMETER_TARGETS: [(ModelKind, Observability, usize); 8] = [
    (ModelKind::Qlstm { layers: 1 }, Observability::Full, 150),
    (ModelKind::Qlstm { layers: 2 }, Observability::Full, 270),
    (ModelKind::Lstm { hidden: 8 }, Observability::Full, 634),
    (ModelKind::Lstm { hidden: 16 }, Observability::Full, 2290),
    (ModelKind::Qlstm { layers: 1 }, Observability::Partial, 146),
    (ModelKind::Qlstm { layers: 2 }, Observability::Partial, 266),
    (ModelKind::Lstm { hidden: 8 }, Observability::Partial, 626),
    (ModelKind::Lstm { hidden: 16 }, Observability::Partial, 2274),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterCheck {
    pub name: String,
    pub expected: usize,
    pub actual: usize,
}

impl ParameterCheck {
    pub fn pass(&self) -> bool {
        self.expected == self.actual
    }
}

impl fmt::Display for ParameterCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.name,
            self.expected,
            self.actual,
            if self.pass() { "pass" } else { "FAIL" }
        )
    }
}

pub fn verify_parameters() -> Vec<ParameterCheck> {
    verify_parameters_with(|kind, obs_dim| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        DressedModel::new(kind, obs_dim, &mut rng)
    })
}

/// Checks every published cell against models produced by `build`. A build
/// failure counts as zero parameters.
pub fn verify_parameters_with<B>(build: B) -> Vec<ParameterCheck>
where
    B: Fn(ModelKind, usize) -> Result<DressedModel>,
{
    PARAMETER_TARGETS
        .iter()
        .map(|&(kind, obs, expected)| ParameterCheck {
            name: format!("{kind}/{obs}"),
            expected,
            actual: build(kind, obs.obs_dim()).map_or(0, |m| count_parameters(&m)),
        })
        .collect()
}

/// Text report, one `name,expected,actual,pass|FAIL` line per cell.
pub fn parameter_report(checks: &[ParameterCheck]) -> String {
    let mut out = String::from("name,expected,actual,result\n");
    for c in checks {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

pub fn seed_dir(base: &Path, seed: u64) -> PathBuf {
    base.join(format!("seed-{seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_cells_pass() {
        let checks = verify_parameters();
        assert_eq!(checks.len(), 8);
        assert!(checks.iter().all(ParameterCheck::pass), "{}", parameter_report(&checks));
    }

    #[test]
    fn mis_sized_hidden_layer_fails_its_cells() {
        let checks = verify_parameters_with(|kind, obs_dim| {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let kind = match kind {
                ModelKind::Lstm { hidden: 16 } => ModelKind::Lstm { hidden: 15 },
                k => k,
            };
            DressedModel::new(kind, obs_dim, &mut rng)
        });
        for c in &checks {
            assert_eq!(c.pass(), !c.name.starts_with("lstm-16"), "{c}");
        }
    }

    #[test]
    fn report_lines() {
        let report = parameter_report(&verify_parameters());
        let lines: Vec<&str> = report.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1], "qlstm-1/full,150,150,pass");
        assert_eq!(lines[5], "qlstm-1/partial,146,146,pass");
    }

    #[test]
    fn spec_json_round_trip() {
        let mut spec = ExperimentSpec::new(ModelKind::Qlstm { layers: 2 }, Observability::Partial);
        spec.train.gamma = 0.95;
        spec.env.max_steps = 500;
        let back: ExperimentSpec = serde_json::from_str(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
        assert!(spec.to_json().contains("\"model\": \"qlstm-2\""));
    }

    #[test]
    fn inconsistent_observability_rejected() {
        let mut spec = ExperimentSpec::new(ModelKind::Lstm { hidden: 8 }, Observability::Full);
        spec.env.partial_observation = true;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn partial_qlstm_count() {
        let spec = ExperimentSpec::new(ModelKind::Qlstm { layers: 1 }, Observability::Partial);
        assert_eq!(spec.parameter_count().unwrap(), 146);
    }
}
