//! Cross-validation, sweeps, the algorithm comparison and their CSV reports.

mod csv;
mod cv;
mod metrics;
mod sweep;

pub use csv::{comparison_csv, emit_csv, sweep_csv, CsvOptions, METRIC_COLUMNS};
pub use cv::{cross_validate, cross_validate_with_folds, run_fold, AlgorithmSpec, CvReport, SVM_TRAIN_CAP};
pub use metrics::{evaluate, ConfusionMatrix, EvalReport, MetricSummary, Moments};
pub use sweep::{
    compare_algorithms, sweep_activations, sweep_architecture, sweep_epochs, sweep_packets, CompareConfig, Comparison,
    ComparisonRow, CvSettings, SweepObserver, SweepResult, SweepRow,
};
