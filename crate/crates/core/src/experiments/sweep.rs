//! Parameter sweeps and the four-way algorithm comparison.

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, cross_validate_with_folds, AlgorithmSpec, SVM_TRAIN_CAP};
use super::metrics::MetricSummary;
use crate::baselines::{ForestConfig, SvmConfig};
use crate::dataset::{stratified_kfold, subsample, EncodedRecord, FoldAssignment};
use crate::error::{Error, Result};
use crate::mlp::{layer_sizes_for, ActivationKind, TrainConfig};
use crate::util::derive_seed;

/// Shared cross-validation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvSettings {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings { folds: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

/// Called after every completed grid point with the rows so far.
pub type SweepObserver<'a> = &'a mut dyn FnMut(&SweepResult) -> Result<()>;

fn run_grid<T>(
    parameter: &str,
    grid: &[T],
    label: impl Fn(&T) -> String,
    mut run: impl FnMut(&T) -> Result<MetricSummary>,
    observer: SweepObserver<'_>,
) -> Result<SweepResult> {
    let mut result = SweepResult {
        parameter: parameter.to_string(),
        rows: Vec::with_capacity(grid.len()),
    };
    for point in grid {
        let value = label(point);
        log::info!("sweep {parameter} = {value}");
        let summary = run(point)?;
        result.rows.push(SweepRow { value, summary });
        observer(&result)?;
    }
    Ok(result)
}

fn sorted_unique<T: Ord + Clone>(grid: &[T]) -> Vec<T> {
    let mut g = grid.to_vec();
    g.sort();
    g.dedup();
    g
}

/// Accuracy and loss as a function of the number of records. Each size is a
/// stratified subsample (seeded by `derive_seed(seed, 1)`); the full size
/// uses the data as given.
pub fn sweep_packets(
    data: &[EncodedRecord],
    grid: &[usize],
    config: &TrainConfig,
    cv: CvSettings,
    observer: SweepObserver<'_>,
) -> Result<SweepResult> {
    config.validate()?;
    let grid = sorted_unique(grid);
    if let Some(&max) = grid.last() {
        if max > data.len() {
            return Err(Error::Bounds {
                requested: max,
                available: data.len(),
            });
        }
    }
    let spec = AlgorithmSpec::Mlp(config.clone());
    run_grid(
        "packets",
        &grid,
        |n| n.to_string(),
        |&n| {
            let report = if n == data.len() {
                cross_validate(&spec, data, cv.folds, cv.seed)?
            } else {
                let sample = subsample(data, n, derive_seed(cv.seed, 1))?;
                cross_validate(&spec, &sample, cv.folds, cv.seed)?
            };
            Ok(report.summary)
        },
        observer,
    )
}

/// Accuracy and loss as a function of the epoch count.
pub fn sweep_epochs(
    data: &[EncodedRecord],
    grid: &[usize],
    config: &TrainConfig,
    cv: CvSettings,
    observer: SweepObserver<'_>,
) -> Result<SweepResult> {
    let grid = sorted_unique(grid);
    let configs: Vec<TrainConfig> = grid
        .iter()
        .map(|&epochs| TrainConfig {
            epochs,
            ..config.clone()
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let folds = stratified_kfold(data, cv.folds, cv.seed)?;
    run_grid(
        "epochs",
        &configs,
        |c| c.epochs.to_string(),
        |c| Ok(cross_validate_with_folds(&AlgorithmSpec::Mlp(c.clone()), data, &folds, cv.seed)?.summary),
        observer,
    )
}

/// Accuracy as a function of network shape `(hidden layers, nodes per layer)`.
/// The activation is always sigmoid.
pub fn sweep_architecture(
    data: &[EncodedRecord],
    grid: &[(usize, usize)],
    config: &TrainConfig,
    cv: CvSettings,
    observer: SweepObserver<'_>,
) -> Result<SweepResult> {
    let grid = sorted_unique(grid);
    for &(layers, nodes) in &grid {
        layer_sizes_for(1, layers, nodes)?;
    }
    config.validate()?;
    let folds = stratified_kfold(data, cv.folds, cv.seed)?;
    run_grid(
        "architecture",
        &grid,
        |(l, n)| format!("{l}x{n}"),
        |&(hidden_layers, nodes)| {
            let c = TrainConfig {
                hidden_layers,
                nodes,
                activation: ActivationKind::Sigmoid,
                ..config.clone()
            };
            Ok(cross_validate_with_folds(&AlgorithmSpec::Mlp(c), data, &folds, cv.seed)?.summary)
        },
        observer,
    )
}

/// Accuracy per activation function, one row each in the order given.
pub fn sweep_activations(
    data: &[EncodedRecord],
    activations: &[ActivationKind],
    config: &TrainConfig,
    cv: CvSettings,
    observer: SweepObserver<'_>,
) -> Result<SweepResult> {
    config.validate()?;
    let folds = stratified_kfold(data, cv.folds, cv.seed)?;
    run_grid(
        "activation",
        activations,
        |a| a.name().to_string(),
        |&activation| {
            let c = TrainConfig {
                activation,
                ..config.clone()
            };
            Ok(cross_validate_with_folds(&AlgorithmSpec::Mlp(c), data, &folds, cv.seed)?.summary)
        },
        observer,
    )
}

/// Hyperparameters of the four compared approaches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub mlp: TrainConfig,
    pub forest: ForestConfig,
    pub svm: SvmConfig,
    pub svm_train_cap: usize,
}

impl Default for CompareConfig {
    /// Sigmoid 2x5 for 100 epochs, 100 trees, default RBF-SVM.
    fn default() -> Self {
        CompareConfig {
            mlp: TrainConfig {
                hidden_layers: 2,
                nodes: 5,
                epochs: 100,
                ..TrainConfig::default()
            },
            forest: ForestConfig::default(),
            svm: SvmConfig::default(),
            svm_train_cap: SVM_TRAIN_CAP,
        }
    }
}

impl CompareConfig {
    pub fn algorithms(&self) -> [(AlgorithmSpec, f64); 4] {
        [
            (AlgorithmSpec::Mlp(self.mlp.clone()), 0.995),
            (AlgorithmSpec::RandomForest(self.forest.clone()), 0.993),
            (
                AlgorithmSpec::Svm {
                    config: self.svm.clone(),
                    train_cap: self.svm_train_cap,
                },
                0.617,
            ),
            (AlgorithmSpec::NaiveBayes, 0.889),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub summary: MetricSummary,
    pub paper_reference_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub folds: FoldAssignment,
    pub rows: Vec<ComparisonRow>,
}

/// Cross-validate all four approaches over one shared fold assignment.
pub fn compare_algorithms(data: &[EncodedRecord], config: &CompareConfig, cv: CvSettings) -> Result<Comparison> {
    let algorithms = config.algorithms();
    for (spec, _) in &algorithms {
        spec.validate()?;
    }
    let folds = stratified_kfold(data, cv.folds, cv.seed)?;
    let mut rows = Vec::with_capacity(algorithms.len());
    for (spec, reference) in algorithms {
        let report = cross_validate_with_folds(&spec, data, &folds, cv.seed)?;
        rows.push(ComparisonRow {
            algorithm: spec.name().to_string(),
            summary: report.summary,
            paper_reference_accuracy: reference,
        });
    }
    Ok(Comparison { folds, rows })
}
