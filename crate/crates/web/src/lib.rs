//! Browser playground for the classifier building blocks: activation curves,
//! a small MLP trained on clicked points, and an RBF-SVM decision field.
//!
//! The plain functions below do the work and are tested natively; the
//! `#[wasm_bindgen]` wrappers only convert to and from JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ami_ids::baselines::{train_svm as fit_svm, SvmConfig};
use ami_ids::dataset::EncodedRecord;
use ami_ids::mlp::{self, ActivationKind, TrainConfig};
use ami_ids::Result;

/// Points live in the square `[-1, 1]²`.
pub const EXTENT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

pub fn activation_curve(kind: ActivationKind, lo: f64, hi: f64, samples: usize) -> Curve {
    let samples = samples.max(2);
    let step = (hi - lo) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples).map(|i| lo + step * i as f64).collect();
    Curve {
        values: xs.iter().map(|&x| kind.apply(x)).collect(),
        derivatives: xs.iter().map(|&x| kind.derivative(x)).collect(),
        xs,
    }
}

/// Row-major grid centres over the square, `resolution` per side.
fn grid(resolution: usize) -> impl Iterator<Item = [f64; 2]> {
    let step = 2.0 * EXTENT / resolution as f64;
    (0..resolution).flat_map(move |row| {
        (0..resolution).map(move |col| [-EXTENT + step * (col as f64 + 0.5), EXTENT - step * (row as f64 + 0.5)])
    })
}

fn records(xs: &[f64], ys: &[f64], labels: &[u8]) -> Vec<EncodedRecord> {
    xs.iter()
        .zip(ys)
        .zip(labels)
        .map(|((&x, &y), &label)| EncodedRecord::new(vec![x, y], u8::from(label != 0)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlpField {
    pub loss: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub resolution: usize,
    /// Attack probability at each grid cell.
    pub field: Vec<f64>,
}

pub fn mlp_field(points: &[EncodedRecord], config: &TrainConfig, resolution: usize) -> Result<MlpField> {
    let (model, trace) = mlp::train(points, config)?;
    let field = grid(resolution)
        .map(|p| model.probabilities(&p).map(|q| q[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(MlpField {
        loss: trace.iter().map(|t| t.loss).collect(),
        accuracy: trace.iter().map(|t| t.accuracy).collect(),
        resolution,
        field,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvmField {
    pub resolution: usize,
    /// Signed margin at each grid cell.
    pub field: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    pub converged: bool,
    pub max_kkt_violation: f64,
}

pub fn svm_field(points: &[EncodedRecord], c: f64, gamma: f64, resolution: usize) -> Result<SvmField> {
    let config = SvmConfig {
        c,
        gamma: Some(gamma),
        ..SvmConfig::default()
    };
    let model = fit_svm(points, &config, 0)?;
    let field = grid(resolution)
        .map(|p| model.decision(&p))
        .collect::<Result<Vec<_>>>()?;
    Ok(SvmField {
        resolution,
        field,
        support_vectors: model.support_vectors.clone(),
        converged: model.converged,
        max_kkt_violation: model.max_kkt_violation,
    })
}

fn to_js<T: Serialize>(value: &T) -> std::result::Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

fn js_err(e: ami_ids::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = activationCurve)]
pub fn activation_curve_js(name: &str, lo: f64, hi: f64, samples: usize) -> std::result::Result<String, JsError> {
    let kind: ActivationKind = name.parse().map_err(js_err)?;
    to_js(&activation_curve(kind, lo, hi, samples))
}

#[wasm_bindgen(js_name = trainMlp)]
#[allow(clippy::too_many_arguments)]
pub fn train_mlp_js(
    xs: &[f64],
    ys: &[f64],
    labels: &[u8],
    activation: &str,
    hidden_layers: usize,
    nodes: usize,
    epochs: usize,
    seed: u32,
    resolution: usize,
) -> std::result::Result<String, JsError> {
    let config = TrainConfig {
        hidden_layers,
        nodes,
        activation: activation.parse().map_err(js_err)?,
        epochs,
        batch_size: 16,
        seed: u64::from(seed),
        ..TrainConfig::default()
    };
    to_js(&mlp_field(&records(xs, ys, labels), &config, resolution).map_err(js_err)?)
}

#[wasm_bindgen(js_name = trainSvm)]
pub fn train_svm_js(
    xs: &[f64],
    ys: &[f64],
    labels: &[u8],
    c: f64,
    gamma: f64,
    resolution: usize,
) -> std::result::Result<String, JsError> {
    to_js(&svm_field(&records(xs, ys, labels), c, gamma, resolution).map_err(js_err)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrants() -> Vec<EncodedRecord> {
        let mut pts = Vec::new();
        for &(x, y) in &[(-0.6, -0.5), (-0.4, -0.7), (-0.7, -0.3), (-0.5, -0.5)] {
            pts.push(EncodedRecord::new(vec![x, y], 0));
            pts.push(EncodedRecord::new(vec![-x, -y], 1));
        }
        pts
    }

    #[test]
    fn curve_endpoints() {
        let c = activation_curve(ActivationKind::Relu, -2.0, 2.0, 5);
        assert_eq!(c.xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(c.values, vec![0.0, 0.0, 0.0, 1.0, 2.0]);
        assert_eq!(c.derivatives, vec![0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn grid_covers_square_row_major() {
        let cells: Vec<[f64; 2]> = grid(2).collect();
        assert_eq!(cells, vec![[-0.5, 0.5], [0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]]);
    }

    #[test]
    fn mlp_field_separates_quadrants() {
        let config = TrainConfig {
            hidden_layers: 1,
            nodes: 8,
            activation: ActivationKind::Tanh,
            epochs: 300,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let f = mlp_field(&quadrants(), &config, 4).unwrap();
        assert_eq!(f.field.len(), 16);
        assert_eq!(f.loss.len(), 300);
        assert!(f.loss.last().unwrap() < &f.loss[0]);
        // top-right cell is attack territory, bottom-left is normal
        assert!(f.field[3] > 0.5 && f.field[12] < 0.5);
    }

    #[test]
    fn svm_field_signs() {
        let f = svm_field(&quadrants(), 1.0, 2.0, 4).unwrap();
        assert!(f.converged);
        assert!(f.field[3] > 0.0 && f.field[12] < 0.0);
        assert!(!f.support_vectors.is_empty());
    }
}
