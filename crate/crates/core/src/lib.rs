//! Intrusion detection for smart-meter (AMI) networks.
//!
//! The crate covers the whole offline and online path:
//!
//! * [`dataset`] turns NSL-KDD text files into standardized numeric records;
//! * [`mlp`] is a dense feedforward classifier with softmax output trained by Adam;
//! * [`baselines`] holds Gaussian naive Bayes, a random forest and an RBF-kernel SVM;
//! * [`experiments`] runs stratified cross-validation, parameter sweeps and
//!   the algorithm comparison, and writes CSV reports;
//! * [`stream`] classifies a live record stream and raises alerts, acting as a
//!   host or network sensor;
//! * [`model_doc`] is the self-describing JSON model file shared by all of them.

pub mod baselines;
pub mod classifier;
#[cfg(feature = "cli")]
pub mod config;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod mlp;
pub mod model_doc;
pub mod stream;
mod util;

pub use error::{Error, Result};
pub use util::{derive_seed, write_atomic};
