use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Sigmoid,
    Relu,
    Tanh,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 3] = [ActivationKind::Sigmoid, ActivationKind::Relu, ActivationKind::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Relu => "relu",
            ActivationKind::Tanh => "tanh",
        }
    }

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => sigmoid(z),
            ActivationKind::Relu => z.max(0.0),
            ActivationKind::Tanh => z.tanh(),
        }
    }

    /// Derivative with respect to the pre-activation `z`. The ReLU
    /// derivative at exactly zero is 0.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            ActivationKind::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "relu" => Ok(ActivationKind::Relu),
            "tanh" => Ok(ActivationKind::Tanh),
            other => Err(Error::Config(format!(
                "unknown activation `{other}` (expected sigmoid, relu or tanh)"
            ))),
        }
    }
}

pub fn activation_apply(kind: ActivationKind, z: f64) -> f64 {
    kind.apply(z)
}

pub fn activation_derivative(kind: ActivationKind, z: f64) -> f64 {
    kind.derivative(z)
}
