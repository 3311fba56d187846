use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use super::adam::{AdamConfig, AdamState};
use super::loss::cross_entropy;
use super::network::{decide, layer_sizes_for, BatchWorkspace, Gradients, MlpModel};
use crate::dataset::EncodedRecord;
use crate::error::{Error, Result};

/// Training hyperparameters for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden_layers: usize,
    pub nodes: usize,
    pub activation: ActivationKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    /// Two hidden layers of 300 sigmoid units, three epochs.
    fn default() -> Self {
        TrainConfig {
            hidden_layers: 2,
            nodes: 300,
            activation: ActivationKind::Sigmoid,
            epochs: 3,
            batch_size: 128,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        layer_sizes_for(1, self.hidden_layers, self.nodes)?;
        self.adam.validate()
    }
}

/// Loss and accuracy accumulated over one pass through the training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

/// Train a fresh network with Adam on shuffled mini-batches.
///
/// Everything random (initial weights, per-epoch shuffles) is drawn from a
/// single ChaCha8 stream seeded with `config.seed`.
pub fn train(data: &[EncodedRecord], config: &TrainConfig) -> Result<(MlpModel, Vec<EpochTrace>)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let inputs = data[0].x.len();
    if let Some(bad) = data.iter().find(|r| r.x.len() != inputs) {
        return Err(Error::shape("training record width", inputs, bad.x.len()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sizes = layer_sizes_for(inputs, config.hidden_layers, config.nodes)?;
    let mut model = MlpModel::init(&sizes, config.activation, &mut rng)?;
    let lengths: Vec<usize> = Gradients::zeros_like(&model)
        .tensors()
        .iter()
        .map(|t| t.len())
        .collect();
    let mut adam = AdamState::new(config.adam, &lengths)?;
    let mut grads = Gradients::zeros_like(&model);

    let batch_size = config.batch_size.min(data.len());
    let mut ws = BatchWorkspace::new(&model, batch_size);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    let mut xs: Vec<&[f64]> = Vec::with_capacity(batch_size);
    let mut ys: Vec<u8> = Vec::with_capacity(batch_size);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(batch_size) {
            xs.clear();
            ys.clear();
            for &i in batch {
                xs.push(&data[i].x);
                ys.push(data[i].y);
            }
            model.forward_batch(&xs, &mut ws)?;
            for (r, &y) in ys.iter().enumerate() {
                let p = ws.output(r);
                loss_sum += cross_entropy(y, p[1]);
                if decide(p).0 == y {
                    correct += 1;
                }
            }
            grads.clear();
            model.backward_batch(&ys, &mut ws, &mut grads);
            grads.scale(1.0 / batch.len() as f64);
            let mut params = model.tensors_mut();
            adam.step(&mut params, &grads.tensors())?;
        }
        let n = data.len() as f64;
        let entry = EpochTrace {
            epoch: epoch + 1,
            loss: loss_sum / n,
            accuracy: correct as f64 / n,
        };
        log::debug!(
            "epoch {} loss {:.6} accuracy {:.4}",
            entry.epoch,
            entry.loss,
            entry.accuracy
        );
        if !entry.loss.is_finite() {
            return Err(Error::Training(format!("loss diverged at epoch {}", entry.epoch)));
        }
        trace.push(entry);
    }
    Ok((model, trace))
}
