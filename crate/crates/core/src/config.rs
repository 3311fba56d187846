//! The TOML run configuration shared by every CLI subcommand.
//!
//! Every key is optional; see `configs/default.toml` for the full schema with
//! defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{ForestConfig, SvmConfig};
use crate::error::{Error, Result};
use crate::experiments::{CompareConfig, CvSettings, SVM_TRAIN_CAP};
use crate::mlp::{layer_sizes_for, ActivationKind, TrainConfig};
use crate::stream::{SensorRole, DEFAULT_THRESHOLD};

/// Master seed when none is configured.
pub const DEFAULT_SEED: u64 = 2019;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub model: TrainConfig,
    pub cv: CvConfig,
    pub sweep: SweepConfig,
    pub baselines: BaselineConfig,
    pub compare: CompareSection,
    pub monitor: MonitorConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from("out"),
            data: DataConfig::default(),
            model: TrainConfig::default(),
            cv: CvConfig::default(),
            sweep: SweepConfig::default(),
            baselines: BaselineConfig::default(),
            compare: CompareSection::default(),
            monitor: MonitorConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// NSL-KDD files concatenated into the working pool.
    pub inputs: Vec<PathBuf>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            inputs: vec![PathBuf::from("data/KDDTrain+.txt")],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub packets: Vec<usize>,
    pub epochs: Vec<usize>,
    /// `[hidden layers, nodes per layer]` pairs.
    pub architecture: Vec<[usize; 2]>,
    pub activations: Vec<ActivationKind>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            packets: vec![62_980, 100_768, 113_364, 125_960],
            epochs: vec![2, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100],
            architecture: vec![[1, 5], [2, 5], [2, 10], [2, 300], [5, 5], [10, 5], [20, 5]],
            activations: ActivationKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub forest: ForestConfig,
    pub svm: SvmConfig,
    pub svm_train_cap: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            forest: ForestConfig::default(),
            svm: SvmConfig::default(),
            svm_train_cap: SVM_TRAIN_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    /// The MLP entered in the comparison.
    pub mlp: TrainConfig,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            mlp: CompareConfig::default().mlp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorConfig {
    pub model: PathBuf,
    pub role: SensorRole,
    pub threshold: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            model: PathBuf::from("out/model.json"),
            role: SensorRole::NetworkSensor,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Include wall-clock training time in CSV reports.
    pub timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { timing: true }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn cv_settings(&self) -> CvSettings {
        CvSettings {
            folds: self.cv.folds,
            seed: self.seed,
        }
    }

    pub fn compare_config(&self) -> CompareConfig {
        CompareConfig {
            mlp: self.compare.mlp.clone(),
            forest: self.baselines.forest.clone(),
            svm: self.baselines.svm.clone(),
            svm_train_cap: self.baselines.svm_train_cap,
        }
    }

    /// Checks that do not touch the file system.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.compare.mlp.validate()?;
        if self.cv.folds < 2 {
            return Err(Error::Config(format!(
                "cv.folds must be at least 2, got {}",
                self.cv.folds
            )));
        }
        if self.sweep.epochs.contains(&0) {
            return Err(Error::Config("sweep.epochs contains 0".into()));
        }
        for &[layers, nodes] in &self.sweep.architecture {
            layer_sizes_for(1, layers, nodes)?;
        }
        if self.baselines.forest.trees == 0 {
            return Err(Error::Config("baselines.forest.trees must be positive".into()));
        }
        if self.baselines.svm_train_cap == 0 {
            return Err(Error::Config("baselines.svm_train_cap must be positive".into()));
        }
        if !(DEFAULT_THRESHOLD..=1.0).contains(&self.monitor.threshold) {
            return Err(Error::Config(format!(
                "monitor.threshold must lie in [0.5, 1], got {}",
                self.monitor.threshold
            )));
        }
        Ok(())
    }

    /// Every configured dataset file must exist.
    pub fn check_inputs(&self) -> Result<()> {
        if self.data.inputs.is_empty() {
            return Err(Error::Config("data.inputs is empty".into()));
        }
        for p in &self.data.inputs {
            if !p.is_file() {
                return Err(Error::Config(format!("input file not found: {}", p.display())));
            }
        }
        Ok(())
    }
}
