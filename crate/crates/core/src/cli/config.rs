//! Experiment files: one TOML document per run.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    gen_circles_with, gen_moons_with, gen_tetromino, gen_worst_case, load_csv, pca_pipeline, Dataset, LabelMap,
    Scaling, WorstCaseVariant, CIRCLES_FACTOR, CIRCLES_NOISE, MOONS_NOISE,
};
use crate::error::{Error, Result};
use crate::model::Scheme;
use crate::noise::NoiseConfig;
use crate::train::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for dataset generation and splits.
    #[serde(default)]
    pub seed: u64,
    /// Not echoed into written configs, so outputs do not depend on where they go.
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    /// Initialization seeds; the lowest-loss restart is reported. Defaults to `[train.seed]`.
    #[serde(default)]
    pub restarts: Option<Vec<u64>>,
    pub dataset: DatasetConfig,
    pub circuit: CircuitConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetConfig {
    Circles {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_factor")]
        factor: f64,
        #[serde(default = "default_circles_noise")]
        noise: f64,
        #[serde(default)]
        scaling: Scaling,
    },
    Moons {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_moons_noise")]
        noise: f64,
        #[serde(default)]
        scaling: Scaling,
    },
    Tetromino {
        #[serde(default = "default_n_train")]
        n_train: usize,
    },
    WorstCase {
        n: usize,
        labels: Vec<u8>,
        #[serde(default = "default_variant")]
        variant: WorstCaseVariant,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_label_column")]
        label_column: String,
        /// Two label strings mapped to class 1 and 2; numeric 1/2 otherwise.
        #[serde(default)]
        class_names: Option<[String; 2]>,
        #[serde(default)]
        pca_k: Option<usize>,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
    },
}

fn default_n() -> usize {
    500
}
fn default_factor() -> f64 {
    CIRCLES_FACTOR
}
fn default_circles_noise() -> f64 {
    CIRCLES_NOISE
}
fn default_moons_noise() -> f64 {
    MOONS_NOISE
}
fn default_n_train() -> usize {
    100
}
fn default_variant() -> WorstCaseVariant {
    WorstCaseVariant::PowersOfTwo
}
fn default_label_column() -> String {
    "label".into()
}
fn default_train_fraction() -> f64 {
    crate::data::DEFAULT_TRAIN_FRACTION
}

/// A single layer count or a list to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Layers {
    One(usize),
    Many(Vec<usize>),
}

impl Layers {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Layers::One(l) => vec![*l],
            Layers::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub scheme: Scheme,
    pub layers: Layers,
    #[serde(default = "default_scale")]
    pub encode_scale: f64,
}

fn default_scale() -> f64 {
    FRAC_PI_2
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Odd grid size for a loss landscape around each trained model.
    #[serde(default)]
    pub landscape_grid: Option<usize>,
    /// Highest Fourier order to report (one-feature data only).
    #[serde(default)]
    pub fourier_orders: Option<usize>,
}

impl ExperimentConfig {
    /// Parses `path`; a relative CSV path is resolved against the config's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| super::UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| super::UsageError(format!("{}: {e}", path.display())))?;
        if let DatasetConfig::Csv { path: csv, .. } = &mut cfg.dataset {
            if csv.is_relative() {
                *csv = path.parent().unwrap_or(Path::new(".")).join(&*csv);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let layers = self.circuit.layers.to_vec();
        if layers.is_empty() || layers.contains(&0) {
            return Err(Error::InvalidArgument("circuit.layers must be non-empty and ≥ 1".into()));
        }
        if !(self.circuit.encode_scale.is_finite() && self.circuit.encode_scale > 0.0) {
            return Err(Error::InvalidArgument("circuit.encode_scale must be positive".into()));
        }
        if self.restarts.as_ref().is_some_and(|r| r.is_empty()) {
            return Err(Error::InvalidArgument("restarts must not be empty".into()));
        }
        self.train.validate()?;
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        if let Some(g) = self.analysis.landscape_grid {
            if g < 3 || g.is_multiple_of(2) {
                return Err(Error::InvalidArgument(format!("analysis.landscape_grid must be odd and ≥ 3, got {g}")));
            }
        }
        if let DatasetConfig::Csv { path, .. } = &self.dataset {
            if !path.is_file() {
                return Err(Error::InvalidArgument(format!("dataset file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn restart_seeds(&self) -> Vec<u64> {
        self.restarts.clone().unwrap_or_else(|| vec![self.train.seed])
    }

    pub fn build_dataset(&self) -> Result<Dataset> {
        self.dataset.build(self.seed)
    }
}

impl DatasetConfig {
    pub fn build(&self, seed: u64) -> Result<Dataset> {
        match self {
            DatasetConfig::Circles { n, factor, noise, scaling } => gen_circles_with(*n, *factor, *noise, seed, *scaling),
            DatasetConfig::Moons { n, noise, scaling } => gen_moons_with(*n, *noise, seed, *scaling),
            DatasetConfig::Tetromino { n_train } => gen_tetromino(*n_train, seed),
            DatasetConfig::WorstCase { n, labels, variant } => Ok(gen_worst_case(*n, labels, *variant)?.0),
            DatasetConfig::Csv { path, label_column, class_names, pca_k, train_fraction } => {
                let map = match class_names {
                    Some([a, b]) => LabelMap::Named(a.clone(), b.clone()),
                    None => LabelMap::Numeric,
                };
                let raw = load_csv(path, label_column, &map)?;
                match pca_k {
                    Some(k) => Ok(pca_pipeline(&raw, *k, *train_fraction, seed)?.0),
                    None => Ok(raw),
                }
            }
        }
    }
}
