//! Confusion counts and the detection metrics derived from them.

use serde::{Deserialize, Serialize};

use crate::classifier::Prediction;
use crate::error::{Error, Result};
use crate::mlp::cross_entropy;

/// Binary confusion counts; attack (1) is the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, predicted: u8, truth: u8) {
        match (predicted, truth) {
            (1, 1) => self.tp += 1,
            (0, 0) => self.tn += 1,
            (1, _) => self.fp += 1,
            _ => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// True-positive rate, absent when there are no attacks.
    pub fn p_detection(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// False-positive rate, absent when there are no normal records.
    pub fn p_false_alarm(&self) -> Option<f64> {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn p_miss(&self) -> Option<f64> {
        ratio(self.fn_, self.tp + self.fn_)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// Mean cross-entropy; only for classifiers with probability outputs.
    pub loss: Option<f64>,
    pub p_detection: Option<f64>,
    pub p_false_alarm: Option<f64>,
    pub p_miss: Option<f64>,
    pub train_seconds: f64,
    pub infer_seconds: f64,
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix, loss: Option<f64>) -> Self {
        EvalReport {
            confusion,
            accuracy: confusion.accuracy(),
            loss,
            p_detection: confusion.p_detection(),
            p_false_alarm: confusion.p_false_alarm(),
            p_miss: confusion.p_miss(),
            train_seconds: 0.0,
            infer_seconds: 0.0,
        }
    }
}

/// Score predictions against ground truth.
///
/// The loss is the mean of `cross_entropy(truth, p_attack)` and is reported
/// only when every prediction carries an attack probability.
pub fn evaluate(predictions: &[Prediction], truths: &[u8]) -> Result<EvalReport> {
    if predictions.len() != truths.len() {
        return Err(Error::Contract(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut confusion = ConfusionMatrix::default();
    let mut loss_sum = 0.0;
    let mut has_loss = true;
    for (p, &y) in predictions.iter().zip(truths) {
        confusion.record(p.class, y);
        match p.attack_probability {
            Some(q) if has_loss => loss_sum += cross_entropy(y, q),
            _ => has_loss = false,
        }
    }
    let loss = has_loss.then(|| loss_sum / predictions.len() as f64);
    Ok(EvalReport::from_confusion(confusion, loss))
}

/// Mean and population standard deviation of a set of values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Option<Moments> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Moments { mean, std: var.sqrt() })
    }
}

/// Fold-averaged metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub folds: usize,
    pub accuracy: Moments,
    pub loss: Option<Moments>,
    pub p_detection: Option<f64>,
    pub p_false_alarm: Option<f64>,
    pub p_miss: Option<f64>,
    /// Mean training time per fold.
    pub train_seconds: f64,
    pub infer_seconds: f64,
    /// Confusion counts summed over folds.
    pub pooled: ConfusionMatrix,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.collect::<Option<Vec<f64>>>()?;
    Moments::of(&v).map(|m| m.mean)
}

impl MetricSummary {
    /// Average per-fold reports. Rate metrics are reported only when defined
    /// in every fold.
    pub fn from_reports(reports: &[EvalReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let acc: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
        let loss: Option<Vec<f64>> = reports.iter().map(|r| r.loss).collect();
        let mut pooled = ConfusionMatrix::default();
        for r in reports {
            pooled.tp += r.confusion.tp;
            pooled.tn += r.confusion.tn;
            pooled.fp += r.confusion.fp;
            pooled.fn_ += r.confusion.fn_;
        }
        let n = reports.len() as f64;
        Ok(MetricSummary {
            folds: reports.len(),
            accuracy: Moments::of(&acc).expect("non-empty"),
            loss: loss.and_then(|l| Moments::of(&l)),
            p_detection: mean_defined(reports.iter().map(|r| r.p_detection)),
            p_false_alarm: mean_defined(reports.iter().map(|r| r.p_false_alarm)),
            p_miss: mean_defined(reports.iter().map(|r| r.p_miss)),
            train_seconds: reports.iter().map(|r| r.train_seconds).sum::<f64>() / n,
            infer_seconds: reports.iter().map(|r| r.infer_seconds).sum::<f64>() / n,
            pooled,
        })
    }
}
