//! Experiment configuration: one TOML file drives prepare, run, sweep,
//! and analyze. Every section has defaults, so an empty file is a valid
//! experiment; command-line flags override file values field by field.
//!
//! ```toml
//! [experiment]
//! systems = ["supervised", "self-training", "stad"]
//! seeds = [1, 2, 3, 4, 5]
//!
//! [paths]
//! data = "dataset.jsonl"
//! schema = "schema.json"
//! splits = "splits"
//! out = "out"
//!
//! [partition]
//! threshold = 0.95
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::SamplerConfig;
use crate::encoder::FeatureConfig;
use crate::error::{CoreError, Result};
use crate::model::TrainConfig;
use crate::selftrain::partition::{FixedNOverflow, PartitionConfig};
use crate::selftrain::pipeline::{System, ALL_SYSTEMS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    pub systems: Vec<System>,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            systems: ALL_SYSTEMS.to_vec(),
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

/// File locations; relative paths are resolved against the config file's
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsSection {
    /// Full labeled dataset, consumed by prepare.
    pub data: PathBuf,
    pub schema: PathBuf,
    /// Split directory: written by prepare, read by run/sweep.
    pub splits: PathBuf,
    /// Output directory for reports, dumps, and analysis files.
    pub out: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            data: PathBuf::from("dataset.jsonl"),
            schema: PathBuf::from("schema.json"),
            splits: PathBuf::from("splits"),
            out: PathBuf::from("out"),
        }
    }
}

impl PathsSection {
    pub fn resolve(&self, base: &Path) -> PathsSection {
        let join = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        PathsSection {
            data: join(&self.data),
            schema: join(&self.schema),
            splits: join(&self.splits),
            out: join(&self.out),
        }
    }
}

/// Grids for the three sweep axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    pub thresholds: Vec<f64>,
    pub fixed_n: Vec<usize>,
    pub k_train: Vec<usize>,
    /// Overflow policy used by the fixed-N axis. Defaults to exclude:
    /// under truncation every uncertain instance keeps its top-1 label,
    /// so hard-label training data would not vary with N at all.
    pub fixed_n_overflow: FixedNOverflow,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            thresholds: vec![0.95, 0.90, 0.85, 0.80],
            fixed_n: (2..=9).collect(),
            k_train: vec![20, 15, 10, 5],
            fixed_n_overflow: FixedNOverflow::Exclude,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub paths: PathsSection,
    pub sampler: SamplerConfig,
    pub features: FeatureConfig,
    pub train: TrainConfig,
    pub partition: PartitionConfig,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CoreError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| CoreError::Config(format!("serializing config: {e}")))?;
        std::fs::write(path, text).map_err(|e| CoreError::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.seeds.is_empty() {
            return Err(CoreError::Config("seeds must be non-empty".into()));
        }
        let mut seeds = self.experiment.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.experiment.seeds.len() {
            return Err(CoreError::Config("seeds must be distinct".into()));
        }
        if self.experiment.systems.is_empty() {
            return Err(CoreError::Config("systems must be non-empty".into()));
        }
        let mut systems = self.experiment.systems.clone();
        systems.sort_by_key(|s| s.slug());
        systems.dedup();
        if systems.len() != self.experiment.systems.len() {
            return Err(CoreError::Config("systems must be distinct".into()));
        }
        self.sampler.validate()?;
        self.features.validate()?;
        self.train.validate()?;
        self.partition.validate_static()?;
        Ok(())
    }
}
