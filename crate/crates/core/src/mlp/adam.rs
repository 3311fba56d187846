use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.alpha
            )));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {beta}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// First and second moment estimates for a list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    /// State for tensors with the given lengths.
    pub fn new(config: AdamConfig, tensor_lengths: &[usize]) -> Result<Self> {
        config.validate()?;
        Ok(AdamState {
            config,
            m: tensor_lengths.iter().map(|&n| vec![0.0; n]).collect(),
            v: tensor_lengths.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        })
    }

    /// One bias-corrected Adam update of `params` along `grads`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::shape("adam parameter tensors", self.m.len(), params.len()));
        }
        if grads.len() != self.m.len() {
            return Err(Error::shape("adam gradient tensors", self.m.len(), grads.len()));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.m[i].len() {
                return Err(Error::shape("adam parameter length", self.m[i].len(), p.len()));
            }
            if g.len() != self.m[i].len() {
                return Err(Error::shape("adam gradient length", self.m[i].len(), g.len()));
            }
        }

        self.t += 1;
        let AdamConfig {
            alpha,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.t as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            for k in 0..p.len() {
                let gk = g[k];
                m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                let m_hat = m[k] / correction1;
                let v_hat = v[k] / correction2;
                p[k] -= alpha * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

pub fn adam_step(state: &mut AdamState, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
    state.step(params, grads)
}
