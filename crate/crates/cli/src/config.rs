//! Declarative experiment configuration: a TOML file names the dataset,
//! the task, the accuracy target, the seeds and the sampling schemes to
//! compare; command-line flags override individual fields.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::dataset::SyntheticTask;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub schemes: Vec<SchemeConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    Synthetic,
    Libsvm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DataSource,
    pub task: SyntheticTask,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Regularizer; defaults to 1/n.
    pub lambda: Option<f64>,
    /// Target accuracy ε for E‖x^k − x*‖².
    pub epsilon: f64,
    /// Sampling seeds, one run per seed.
    pub seeds: Vec<u64>,
    /// Seed of the shared Gaussian starting point (and of the non-convex
    /// construction). Defaults to 0.
    pub base_seed: Option<u64>,
    /// Epoch budget per run. Defaults to 50.
    pub max_epochs: Option<f64>,
    /// Early-stop threshold on ‖x^k − x*‖² for single runs. Defaults to
    /// 1e-3; set to 0 to disable.
    pub stop_threshold: Option<f64>,
    /// "constant" (ε-target rule) or "switching". Defaults to constant.
    pub stepsize: Option<StepsizeKind>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepsizeKind {
    Constant,
    Switching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    SingleUniform,
    SingleImportance,
    SinglePartiallyBiased,
    TauNice,
    IndependentUniform,
    IndependentImportance,
    IndependentPartiallyBiased,
    Partition,
    FullBatch,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::SingleUniform => "single-uniform",
            SchemeKind::SingleImportance => "single-importance",
            SchemeKind::SinglePartiallyBiased => "single-pb",
            SchemeKind::TauNice => "tau-nice",
            SchemeKind::IndependentUniform => "independent-uniform",
            SchemeKind::IndependentImportance => "independent-importance",
            SchemeKind::IndependentPartiallyBiased => "independent-pb",
            SchemeKind::Partition => "partition",
            SchemeKind::FullBatch => "full-batch",
        }
    }

    pub fn needs_tau(&self) -> bool {
        matches!(
            self,
            SchemeKind::TauNice
                | SchemeKind::IndependentUniform
                | SchemeKind::IndependentImportance
                | SchemeKind::IndependentPartiallyBiased
                | SchemeKind::Partition
        )
    }

    /// The two families with a total-complexity minimizer τ*.
    pub fn supports_optimal_tau(&self) -> bool {
        matches!(self, SchemeKind::TauNice | SchemeKind::IndependentUniform)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauValue {
    Fixed(usize),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub tau: Option<TauValue>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let epsilon = self.experiment.epsilon;
        if !epsilon.is_finite() || epsilon <= 0.0 {
            bail!("experiment.epsilon must be positive");
        }
        if self.experiment.seeds.is_empty() {
            bail!("experiment.seeds must not be empty");
        }
        if let Some(l) = self.experiment.lambda {
            if l < 0.0 {
                bail!("experiment.lambda must be nonnegative");
            }
        }
        if let Some(e) = self.experiment.max_epochs {
            if e.is_nan() || e < 1.0 {
                bail!("experiment.max_epochs must be at least 1");
            }
        }
        match self.dataset.source {
            DataSource::Synthetic => {
                if self.dataset.n.is_none() || self.dataset.d.is_none() {
                    bail!("synthetic datasets need dataset.n and dataset.d");
                }
            }
            DataSource::Libsvm => {
                if self.dataset.path.is_none() {
                    bail!("libsvm datasets need dataset.path");
                }
            }
        }
        for scheme in &self.schemes {
            match (&scheme.tau, scheme.kind.needs_tau()) {
                (None, true) => bail!("scheme {} needs a tau", scheme.kind.label()),
                (Some(TauValue::Named(name)), _) => {
                    if name != "optimal" {
                        bail!("tau must be an integer or \"optimal\", got {name:?}");
                    }
                    if !scheme.kind.supports_optimal_tau() {
                        bail!(
                            "tau = \"optimal\" is only defined for tau-nice and independent-uniform, not {}",
                            scheme.kind.label()
                        );
                    }
                }
                (Some(TauValue::Fixed(t)), _) => {
                    if *t == 0 {
                        bail!("tau must be at least 1");
                    }
                }
                (None, false) => {}
            }
        }
        Ok(())
    }

    pub fn max_epochs(&self) -> f64 {
        self.experiment.max_epochs.unwrap_or(50.0)
    }

    pub fn base_seed(&self) -> u64 {
        self.experiment.base_seed.unwrap_or(0)
    }

    pub fn stop_threshold(&self) -> Option<f64> {
        match self.experiment.stop_threshold {
            Some(t) if t <= 0.0 => None,
            Some(t) => Some(t),
            None => Some(1e-3),
        }
    }

    pub fn stepsize_kind(&self) -> StepsizeKind {
        self.experiment.stepsize.unwrap_or(StepsizeKind::Constant)
    }
}

/// Output directory priority: explicit flag, then the config file, then
/// the SGDSAMP_OUTPUT_DIR environment variable, then the working
/// directory.
pub fn resolve_output_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = config {
        return p.to_path_buf();
    }
    if let Ok(env_dir) = std::env::var("SGDSAMP_OUTPUT_DIR") {
        if !env_dir.is_empty() {
            return PathBuf::from(env_dir);
        }
    }
    PathBuf::from(".")
}
