use std::io;

use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("unknown {field} symbol `{symbol}`")]
    UnknownSymbol { field: &'static str, symbol: String },

    #[error("feature {feature}: `{value}` is not a finite number")]
    InvalidValue { feature: usize, value: String },

    #[error("insufficient data: need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("cannot stratify into {folds} folds: class {class} has only {count} members")]
    Stratification { class: u8, count: usize, folds: usize },

    #[error("requested {requested} records but only {available} are available")]
    Bounds { requested: usize, available: usize },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("malformed model document: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Shape { context, expected, got }
    }
}
