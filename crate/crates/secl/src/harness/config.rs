use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoders::{Activation, EncoderDims};
use crate::error::{Error, Result};
use crate::eval::NmiNorm;
use crate::graph::{load_graph, Graph, DEFAULT_DENSE_CAP};
use crate::losses::{Ablation, LossWeights, DEFAULT_SIMILARITY_DENSE_CAP};

/// Where a dataset lives. Relative file names resolve against `dir`, and a
/// relative `dir` against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    #[serde(default)]
    pub dir: PathBuf,
    pub edges: PathBuf,
    pub attributes: PathBuf,
    #[serde(default)]
    pub labels: Option<PathBuf>,
    pub clusters: usize,
}

impl DatasetConfig {
    fn resolve(&self, file: &Path) -> PathBuf {
        if file.is_absolute() {
            file.to_path_buf()
        } else {
            self.dir.join(file)
        }
    }

    pub fn edge_path(&self) -> PathBuf {
        self.resolve(&self.edges)
    }

    pub fn attribute_path(&self) -> PathBuf {
        self.resolve(&self.attributes)
    }

    pub fn label_path(&self) -> Option<PathBuf> {
        self.labels.as_deref().map(|p| self.resolve(p))
    }

    pub fn load(&self) -> Result<Graph> {
        load_graph(&self.edge_path(), &self.attribute_path(), self.label_path().as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Filter depth r.
    pub r: usize,
    pub structure_widths: Vec<usize>,
    pub attribute_widths: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub tau: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(default)]
    pub ablation: Ablation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimConfig {
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_epochs() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub deterministic: bool,
    /// Largest N for a dense modularity matrix.
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    /// Largest N for a dense similarity matrix in the structural loss.
    #[serde(default = "default_similarity_cap")]
    pub similarity_dense_cap: usize,
    #[serde(default = "default_restarts")]
    pub kmeans_restarts: usize,
    #[serde(default = "default_max_iter")]
    pub kmeans_max_iter: usize,
    #[serde(default)]
    pub nmi_norm: NmiNorm,
}

fn default_runs() -> usize {
    10
}
fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}
fn default_similarity_cap() -> usize {
    DEFAULT_SIMILARITY_DENSE_CAP
}
fn default_restarts() -> usize {
    10
}
fn default_max_iter() -> usize {
    300
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            runs: default_runs(),
            deterministic: false,
            dense_cap: default_dense_cap(),
            similarity_dense_cap: default_similarity_cap(),
            kmeans_restarts: default_restarts(),
            kmeans_max_iter: default_max_iter(),
            nmi_norm: NmiNorm::default(),
        }
    }
}

/// Everything one experiment needs, read from a TOML file with `[dataset]`,
/// `[model]`, `[loss]`, `[optim]` and `[run]` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub loss: LossConfig,
    pub optim: OptimConfig,
    #[serde(default)]
    pub run: RunConfig,
}

impl TrainConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses `path` and anchors a relative dataset directory at its parent.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if config.dataset.dir.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            config.dataset.dir = base.join(&config.dataset.dir);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let tau = self.loss.tau;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::config(format!("tau must be positive, got {tau}")));
        }
        self.weights().validate()?;
        let lr = self.optim.learning_rate;
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::config(format!("learning_rate must be positive, got {lr}")));
        }
        if self.optim.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if self.run.runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        if self.run.kmeans_restarts == 0 {
            return Err(Error::config("kmeans_restarts must be at least 1"));
        }
        if self.dataset.clusters == 0 {
            return Err(Error::config("clusters must be at least 1"));
        }
        // input widths are placeholders; only the layer shapes are checked here
        self.encoder_dims(1, 1).validate()
    }

    pub fn weights(&self) -> LossWeights {
        LossWeights {
            lambda1: self.loss.lambda1,
            lambda2: self.loss.lambda2,
            ablation: self.loss.ablation,
        }
    }

    pub fn encoder_dims(&self, n: usize, d: usize) -> EncoderDims {
        EncoderDims {
            structure_in: n,
            attribute_in: d,
            structure_widths: self.model.structure_widths.clone(),
            attribute_widths: self.model.attribute_widths.clone(),
            clusters: self.dataset.clusters,
        }
    }

    /// Seed of run `k` (0-based).
    pub fn run_seed(&self, k: usize) -> u64 {
        self.run.seed.wrapping_add(k as u64)
    }

    /// SHA-256 over the canonical JSON form, hex encoded. The dataset
    /// directory is excluded so the hash does not depend on where the config
    /// file sits.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.dataset.dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
