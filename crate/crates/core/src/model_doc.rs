//! Self-describing JSON model documents.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "model": { "kind": "mlp", "layer_sizes": [41, 5, 5, 2], "activation": "sigmoid",
//!              "weights": [[...], ...], "biases": [[...], ...] },
//!   "encoding": { "protocol_map": {...}, "flag_map": {...}, "service_map": {...}, "label_map": {...} },
//!   "standardization": { "mu": [...], "sigma": [...], "constant_mask": [...] }
//! }
//! ```
//!
//! Weights are flattened row-major per layer. Floats are written in the
//! shortest form that parses back to the same bits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{GaussianNbModel, RandomForestModel, SvmModel};
use crate::classifier::Classifier;
use crate::dataset::{encode_features, EncodingTable, StandardizationParams};
use crate::error::{Error, Result};
use crate::mlp::{ActivationKind, DenseMatrix, MlpModel};
use crate::util::write_atomic;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MlpRepr {
    layer_sizes: Vec<usize>,
    activation: ActivationKind,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelRepr {
    Mlp(MlpRepr),
    NaiveBayes(GaussianNbModel),
    RandomForest(RandomForestModel),
    Svm(SvmModel),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRepr {
    schema_version: u32,
    model: ModelRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    encoding: Option<EncodingTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    standardization: Option<StandardizationParams>,
}

/// A trained classifier plus the preprocessing needed to feed it raw records.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub classifier: Classifier,
    pub encoding: Option<EncodingTable>,
    pub standardization: Option<StandardizationParams>,
}

impl ModelDocument {
    pub fn new(classifier: Classifier, encoding: EncodingTable, standardization: StandardizationParams) -> Self {
        ModelDocument {
            classifier,
            encoding: Some(encoding),
            standardization: Some(standardization),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let model = match &self.classifier {
            Classifier::Mlp(m) => ModelRepr::Mlp(MlpRepr {
                layer_sizes: m.layer_sizes().to_vec(),
                activation: m.activation(),
                weights: m.weights().iter().map(|w| w.data().to_vec()).collect(),
                biases: m.biases().to_vec(),
            }),
            Classifier::NaiveBayes(m) => ModelRepr::NaiveBayes(m.clone()),
            Classifier::RandomForest(m) => ModelRepr::RandomForest(m.clone()),
            Classifier::Svm(m) => ModelRepr::Svm(m.clone()),
        };
        let doc = DocumentRepr {
            schema_version: SCHEMA_VERSION,
            model,
            encoding: self.encoding.clone(),
            standardization: self.standardization.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DocumentRepr = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let classifier = match doc.model {
            ModelRepr::Mlp(repr) => {
                if repr.layer_sizes.len() < 2 || repr.weights.len() != repr.layer_sizes.len() - 1 {
                    return Err(Error::Format("mlp weights do not match layer_sizes".into()));
                }
                let weights = repr
                    .weights
                    .into_iter()
                    .enumerate()
                    .map(|(l, data)| DenseMatrix::from_vec(repr.layer_sizes[l + 1], repr.layer_sizes[l], data))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Format(format!("model.weights: {e}")))?;
                let model = MlpModel::from_parts(repr.layer_sizes, repr.activation, weights, repr.biases)
                    .map_err(|e| Error::Format(format!("model: {e}")))?;
                Classifier::Mlp(model)
            }
            ModelRepr::NaiveBayes(m) => Classifier::NaiveBayes(m),
            ModelRepr::RandomForest(m) => Classifier::RandomForest(m),
            ModelRepr::Svm(m) => Classifier::Svm(m),
        };
        if let Some(s) = &doc.standardization {
            let w = s.mu.len();
            if s.sigma.len() != w || s.constant_mask.len() != w {
                return Err(Error::Format("standardization vectors differ in length".into()));
            }
        }
        Ok(ModelDocument {
            classifier,
            encoding: doc.encoding,
            standardization: doc.standardization,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Encode and standardize 41 raw feature strings for this model.
    pub fn prepare(&self, features: &[String]) -> Result<Vec<f64>> {
        let encoding = self
            .encoding
            .as_ref()
            .ok_or_else(|| Error::Format("model document has no encoding table".into()))?;
        let x = encode_features(features, encoding)?;
        Ok(match &self.standardization {
            Some(params) => params.apply(&x),
            None => x,
        })
    }
}
