//! A single handle over every trained model kind.

use crate::baselines::{GaussianNbModel, RandomForestModel, SvmModel};
use crate::error::Result;
use crate::mlp::MlpModel;

/// Output of any classifier for one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: u8,
    /// Probability-like support for the predicted class, in `[0.5, 1]`.
    /// `None` for margin classifiers.
    pub confidence: Option<f64>,
    /// Estimated probability of the attack class, when available.
    pub attack_probability: Option<f64>,
    /// Signed SVM decision value.
    pub margin: Option<f64>,
}

impl Prediction {
    fn from_probabilities(p: [f64; 2]) -> Self {
        let (class, confidence) = if p[1] > p[0] { (1, p[1]) } else { (0, p[0]) };
        Prediction {
            class,
            confidence: Some(confidence),
            attack_probability: Some(p[1]),
            margin: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Mlp(MlpModel),
    NaiveBayes(GaussianNbModel),
    RandomForest(RandomForestModel),
    Svm(SvmModel),
}

impl Classifier {
    pub fn kind(&self) -> &'static str {
        match self {
            Classifier::Mlp(_) => "mlp",
            Classifier::NaiveBayes(_) => "naive_bayes",
            Classifier::RandomForest(_) => "random_forest",
            Classifier::Svm(_) => "svm",
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            Classifier::Mlp(m) => Ok(Prediction::from_probabilities(m.probabilities(x)?)),
            Classifier::NaiveBayes(m) => Ok(Prediction::from_probabilities(m.posterior(x)?)),
            Classifier::RandomForest(m) => {
                let (class, confidence) = m.predict(x)?;
                Ok(Prediction {
                    class,
                    confidence: Some(confidence),
                    attack_probability: Some(m.attack_votes(x) as f64 / m.trees.len() as f64),
                    margin: None,
                })
            }
            Classifier::Svm(m) => {
                let (class, margin) = m.predict(x)?;
                Ok(Prediction {
                    class,
                    confidence: None,
                    attack_probability: None,
                    margin: Some(margin),
                })
            }
        }
    }

    pub fn predict_many(&self, xs: &[&[f64]]) -> Result<Vec<Prediction>> {
        match self {
            Classifier::Mlp(m) => Ok(m
                .probabilities_many(xs)?
                .into_iter()
                .map(Prediction::from_probabilities)
                .collect()),
            _ => xs.iter().map(|x| self.predict(x)).collect(),
        }
    }
}
