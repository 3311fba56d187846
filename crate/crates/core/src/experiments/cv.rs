//! Stratified k-fold cross-validation over any supported algorithm.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, EvalReport, MetricSummary};
use crate::baselines::{train_forest_with, train_nb, train_svm, ForestConfig, SvmConfig};
use crate::classifier::Classifier;
use crate::dataset::{
    fit_standardization, standardize_all, stratified_kfold, subsample, EncodedRecord, FoldAssignment,
};
use crate::error::{Error, Result};
use crate::mlp::{self, TrainConfig};
use crate::util::{derive_seed, map_indexed};

/// Default cap on SVM training records per fold.
pub const SVM_TRAIN_CAP: usize = 5_000;

/// What to train inside each fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Mlp(TrainConfig),
    RandomForest(ForestConfig),
    NaiveBayes,
    Svm {
        config: SvmConfig,
        /// Larger training folds are stratified-subsampled to this size.
        train_cap: usize,
    },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Mlp(_) => "mlp",
            AlgorithmSpec::RandomForest(_) => "random_forest",
            AlgorithmSpec::NaiveBayes => "naive_bayes",
            AlgorithmSpec::Svm { .. } => "svm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmSpec::Mlp(c) => c.validate(),
            AlgorithmSpec::RandomForest(c) if c.trees == 0 => {
                Err(Error::Config("a forest needs at least one tree".into()))
            }
            AlgorithmSpec::Svm { train_cap: 0, .. } => Err(Error::Config("svm train_cap must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Train on already-standardized records. `seed` drives every random
    /// choice; the MLP's own `seed` field is replaced by it.
    pub fn fit(&self, train: &[EncodedRecord], seed: u64) -> Result<Classifier> {
        match self {
            AlgorithmSpec::Mlp(config) => {
                let config = TrainConfig { seed, ..config.clone() };
                let (model, _) = mlp::train(train, &config)?;
                Ok(Classifier::Mlp(model))
            }
            AlgorithmSpec::RandomForest(config) => {
                Ok(Classifier::RandomForest(train_forest_with(train, config, seed)?))
            }
            AlgorithmSpec::NaiveBayes => Ok(Classifier::NaiveBayes(train_nb(train)?)),
            AlgorithmSpec::Svm { config, train_cap } => {
                let model = if train.len() > *train_cap {
                    let capped = subsample(train, *train_cap, derive_seed(seed, 1))?;
                    train_svm(&capped, config, seed)?
                } else {
                    train_svm(train, config, seed)?
                };
                Ok(Classifier::Svm(model))
            }
        }
    }
}

/// Per-fold reports and their average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<EvalReport>,
    pub summary: MetricSummary,
}

/// `k`-fold cross-validation with folds drawn from `seed`.
pub fn cross_validate(spec: &AlgorithmSpec, data: &[EncodedRecord], k: usize, seed: u64) -> Result<CvReport> {
    spec.validate()?;
    let folds = stratified_kfold(data, k, seed)?;
    cross_validate_with_folds(spec, data, &folds, seed)
}

/// Run one fold: fit standardization on the training part, train, score the
/// held-out part.
pub fn run_fold(
    spec: &AlgorithmSpec,
    data: &[EncodedRecord],
    folds: &FoldAssignment,
    fold: usize,
    seed: u64,
) -> Result<EvalReport> {
    let train_raw: Vec<EncodedRecord> = folds.train_indices(fold).into_iter().map(|i| data[i].clone()).collect();
    let params = fit_standardization(&train_raw)?;
    let train = standardize_all(&train_raw, &params);
    drop(train_raw);
    let test: Vec<EncodedRecord> = folds
        .test_indices(fold)
        .into_iter()
        .map(|i| crate::dataset::standardize(&data[i], &params))
        .collect();

    let started = Instant::now();
    let model = spec.fit(&train, derive_seed(seed, 1000 + fold as u64))?;
    let train_seconds = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let xs: Vec<&[f64]> = test.iter().map(|r| r.x.as_slice()).collect();
    let predictions = model.predict_many(&xs)?;
    let infer_seconds = started.elapsed().as_secs_f64();

    let truths: Vec<u8> = test.iter().map(|r| r.y).collect();
    let mut report = evaluate(&predictions, &truths)?;
    report.train_seconds = train_seconds;
    report.infer_seconds = infer_seconds;
    log::info!(
        "{} fold {}/{}: accuracy {:.4} ({:.1}s)",
        spec.name(),
        fold + 1,
        folds.k,
        report.accuracy,
        train_seconds
    );
    Ok(report)
}

/// Cross-validation over a fixed fold assignment.
pub fn cross_validate_with_folds(
    spec: &AlgorithmSpec,
    data: &[EncodedRecord],
    folds: &FoldAssignment,
    seed: u64,
) -> Result<CvReport> {
    spec.validate()?;
    if folds.assignment.len() != data.len() {
        return Err(Error::shape(
            "fold assignment length",
            data.len(),
            folds.assignment.len(),
        ));
    }
    let reports = map_indexed(folds.k, |f| run_fold(spec, data, folds, f, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let summary = MetricSummary::from_reports(&reports)?;
    Ok(CvReport {
        folds: reports,
        summary,
    })
}
