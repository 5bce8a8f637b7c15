use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sketchy_core::optim::SvrgOption;
use sketchy_core::{Loss, Method, OptimizerConfig, PreconditionerKind, UpdateSchedule};

use crate::error::{BenchError, Result};
use crate::features::RandomFeatures;
use crate::preprocess::Preprocessing;
use crate::synthetic::Synthetic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Svmlight {
        path: PathBuf,
        #[serde(default)]
        n_features: Option<usize>,
    },
    Synthetic(Synthetic),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Ridge,
    Logistic,
}

impl Task {
    pub fn loss(self) -> Loss {
        match self {
            Task::Ridge => Loss::Squared,
            Task::Logistic => Loss::Logistic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NuRule {
    Absolute(f64),
    /// `ν = c / n_tr`.
    PerSample(f64),
}

impl NuRule {
    pub fn resolve(self, n_train: usize) -> f64 {
        match self {
            NuRule::Absolute(nu) => nu,
            NuRule::PerSample(c) => c / n_train as f64,
        }
    }
}

impl Default for NuRule {
    fn default() -> Self {
        NuRule::PerSample(1e-2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    /// Fraction of samples held out, in `[0, 1)`.
    #[serde(default)]
    pub holdout: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Once,
    /// Every `k` optimizer steps.
    Every(usize),
}

/// One optimizer run. Unset fields use the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub method: String,
    #[serde(default)]
    pub precond: Option<String>,
    pub grad_batch: usize,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub hess_batch: Option<usize>,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default)]
    pub inner_steps: Option<usize>,
    #[serde(default)]
    pub theta2: Option<f64>,
    #[serde(default)]
    pub snapshot_prob: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub svrg_random_snapshot: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunSpec {
    pub fn new(method: Method, grad_batch: usize) -> Self {
        Self {
            method: method.name().into(),
            precond: None,
            grad_batch,
            label: None,
            hess_batch: None,
            rank: None,
            rho: None,
            schedule: None,
            alpha: None,
            learning_rate: None,
            inner_steps: None,
            theta2: None,
            snapshot_prob: None,
            mu: None,
            svrg_random_snapshot: false,
            seed: None,
        }
    }

    pub fn method(&self) -> Result<Method> {
        Ok(self.method.parse()?)
    }

    /// `None` for unpreconditioned methods.
    pub fn precond_kind(&self) -> Result<Option<PreconditionerKind>> {
        let method = self.method()?;
        match (&self.precond, method.is_preconditioned()) {
            (None, true) => Ok(Some(PreconditionerKind::NySsn)),
            (Some(k), true) => Ok(Some(k.parse()?)),
            (None, false) => Ok(None),
            (Some(_), false) => Err(BenchError::Config(format!("{method} takes no preconditioner"))),
        }
    }

    /// File stem of the run's CSV.
    pub fn name(&self) -> Result<String> {
        if let Some(l) = &self.label {
            return Ok(l.clone());
        }
        let m = self.method()?;
        Ok(match self.precond_kind()? {
            Some(k) => format!("{m}-{k}"),
            None => m.name().to_string(),
        })
    }

    pub fn optimizer_config(&self, max_epochs: usize, seed: u64) -> Result<OptimizerConfig<f64>> {
        let method = self.method()?;
        let mut c = OptimizerConfig::new(method, self.grad_batch)
            .with_epochs(max_epochs)
            .with_seed(self.seed.unwrap_or(seed));
        if let Some(k) = self.precond_kind()? {
            c.precond = k;
        }
        c.hess_batch = self.hess_batch;
        c.rank = self.rank;
        c.rho = self.rho;
        c.schedule = self.schedule.map(|s| match s {
            ScheduleSpec::Once => UpdateSchedule::Once,
            ScheduleSpec::Every(k) => UpdateSchedule::Every(k),
        });
        c.alpha = self.alpha;
        c.learning_rate = self.learning_rate;
        c.inner_steps = self.inner_steps;
        if let Some(t) = self.theta2 {
            c.theta2 = t;
        }
        c.snapshot_prob = self.snapshot_prob;
        c.mu = self.mu;
        if self.svrg_random_snapshot {
            c.svrg_option = SvrgOption::II;
        }
        Ok(c)
    }
}

fn default_epochs() -> usize {
    40
}

fn default_true() -> bool {
    true
}

fn default_tolerance() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub task: Task,
    #[serde(default)]
    pub preprocessing: Preprocessing,
    #[serde(default)]
    pub random_features: RandomFeatures,
    #[serde(default)]
    pub split: Split,
    #[serde(default)]
    pub nu: NuRule,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
    #[serde(default = "default_epochs")]
    pub max_epochs: usize,
    /// Output directory.
    pub output: PathBuf,
    /// Optimizer and random-feature seed.
    #[serde(default)]
    pub seed: u64,
    /// When false the `seconds` column is written as 0.
    #[serde(default = "default_true")]
    pub record_wall_clock: bool,
    /// Suboptimality counted as solved in the summary.
    #[serde(default = "default_tolerance")]
    pub solve_tolerance: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        // relative data paths are taken from the config's directory
        if let DataSource::Svmlight { path: data, .. } = &mut cfg.data {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.split.holdout) {
            return Err(BenchError::Config(format!("holdout must lie in [0, 1), got {}", self.split.holdout)));
        }
        self.random_features.validate()?;
        let nu = match self.nu {
            NuRule::Absolute(v) | NuRule::PerSample(v) => v,
        };
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(BenchError::Config(format!("nu must be finite and ≥ 0, got {nu}")));
        }
        if !(self.solve_tolerance > 0.0) {
            return Err(BenchError::Config("solve_tolerance must be positive".into()));
        }
        let mut names = std::collections::HashSet::new();
        for r in &self.runs {
            if r.grad_batch == 0 {
                return Err(BenchError::Config("grad_batch must be ≥ 1".into()));
            }
            if !names.insert(r.name()?) {
                return Err(BenchError::Config(format!("duplicate run name '{}'; set a label", r.name()?)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "data": {"synthetic": {"ridge": {"n": 100, "p": 5, "beta": 1.0}}},
        "task": "ridge",
        "output": "out"
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.max_epochs, 40);
        assert_eq!(c.nu, NuRule::PerSample(1e-2));
        assert_eq!(c.preprocessing, Preprocessing::None);
        assert_eq!(c.random_features, RandomFeatures::None);
        assert!(c.record_wall_clock && c.runs.is_empty());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("\"task\"", "\"colour\": 1, \"task\"");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(BenchError::Json(_))));
        let bad = MINIMAL.replace("\"beta\": 1.0", "\"beta\": 1.0, \"kappa\": 3");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"{
            "data": {"svmlight": {"path": "mushrooms", "n_features": 112}},
            "task": "logistic",
            "preprocessing": "unit_row_norm",
            "random_features": {"gaussian": {"dim": 64, "bandwidth": 1.0}},
            "split": {"holdout": 0.2, "seed": 4},
            "nu": {"absolute": 0.001},
            "runs": [
                {"method": "SketchySAGA", "precond": "sassn-c", "grad_batch": 256, "rank": 20, "schedule": {"every": 50}},
                {"method": "saga", "grad_batch": 256, "learning_rate": 0.5}
            ],
            "max_epochs": 10,
            "output": "/tmp/x",
            "seed": 9,
            "record_wall_clock": false
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.runs[0].name().unwrap(), "sketchysaga-sassn-c");
        assert_eq!(c.runs[1].name().unwrap(), "saga");
        let oc = c.runs[0].optimizer_config(c.max_epochs, c.seed).unwrap();
        assert_eq!(oc.schedule, Some(UpdateSchedule::Every(50)));
        assert_eq!(oc.seed, 9);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn invalid_values_rejected() {
        let holdout = MINIMAL.replace("\"task\"", "\"split\": {\"holdout\": 1.0}, \"task\"");
        assert!(matches!(ExperimentConfig::from_json(&holdout), Err(BenchError::Config(_))));
        let rf = MINIMAL.replace("\"task\"", "\"random_features\": {\"relu\": {\"dim\": 0}}, \"task\"");
        assert!(ExperimentConfig::from_json(&rf).is_err());
        let method = MINIMAL.replace("\"task\"", "\"runs\": [{\"method\": \"adam\", \"grad_batch\": 4}], \"task\"");
        assert!(ExperimentConfig::from_json(&method).is_err());
        let pc = MINIMAL.replace("\"task\"", "\"runs\": [{\"method\": \"svrg\", \"precond\": \"ssn\", \"grad_batch\": 4}], \"task\"");
        assert!(ExperimentConfig::from_json(&pc).is_err());
        let dup = MINIMAL.replace(
            "\"task\"",
            "\"runs\": [{\"method\": \"svrg\", \"grad_batch\": 4}, {\"method\": \"svrg\", \"grad_batch\": 8}], \"task\"",
        );
        assert!(ExperimentConfig::from_json(&dup).is_err());
    }
}
