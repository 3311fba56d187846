//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedRecord;
use crate::error::{Error, Result};

/// Relative variance smoothing, scaled by the largest feature variance.
pub const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    /// Per-class variances with the smoothing term already added.
    pub variances: [Vec<f64>; 2],
    pub var_smoothing: f64,
}

fn mean_var(rows: &[&[f64]], width: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; width];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; width];
    for r in rows {
        for i in 0..width {
            let d = r[i] - mean[i];
            var[i] += d * d;
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    (mean, var)
}

pub fn train_nb(data: &[EncodedRecord]) -> Result<GaussianNbModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = data[0].x.len();
    if let Some(bad) = data.iter().find(|r| r.x.len() != width) {
        return Err(Error::shape("naive Bayes training width", width, bad.x.len()));
    }
    let all: Vec<&[f64]> = data.iter().map(|r| r.x.as_slice()).collect();
    let (_, overall_var) = mean_var(&all, width);
    let max_var = overall_var.iter().copied().fold(0.0, f64::max);
    let var_smoothing = if max_var > 0.0 {
        VAR_SMOOTHING * max_var
    } else {
        VAR_SMOOTHING
    };

    let mut priors = [0.0; 2];
    let mut means: [Vec<f64>; 2] = Default::default();
    let mut variances: [Vec<f64>; 2] = Default::default();
    for class in 0..2u8 {
        let rows: Vec<&[f64]> = data.iter().filter(|r| r.y == class).map(|r| r.x.as_slice()).collect();
        if rows.is_empty() {
            return Err(Error::Training(format!(
                "naive Bayes needs both classes; class {class} is absent"
            )));
        }
        let (mean, mut var) = mean_var(&rows, width);
        var.iter_mut().for_each(|v| *v += var_smoothing);
        let c = usize::from(class);
        priors[c] = rows.len() as f64 / data.len() as f64;
        means[c] = mean;
        variances[c] = var;
    }
    Ok(GaussianNbModel {
        priors,
        means,
        variances,
        var_smoothing,
    })
}

impl GaussianNbModel {
    /// Unnormalized log posterior of each class.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Result<[f64; 2]> {
        let width = self.means[0].len();
        if x.len() != width {
            return Err(Error::shape("naive Bayes input", width, x.len()));
        }
        let mut out = [0.0; 2];
        for c in 0..2 {
            let mut ll = self.priors[c].ln();
            for i in 0..width {
                let var = self.variances[c][i];
                let d = x[i] - self.means[c][i];
                ll -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
            }
            out[c] = ll;
        }
        Ok(out)
    }

    /// Normalized posterior `[p(normal | x), p(attack | x)]`.
    pub fn posterior(&self, x: &[f64]) -> Result<[f64; 2]> {
        let jll = self.joint_log_likelihood(x)?;
        let max = jll[0].max(jll[1]);
        let e0 = (jll[0] - max).exp();
        let e1 = (jll[1] - max).exp();
        Ok([e0 / (e0 + e1), e1 / (e0 + e1)])
    }

    pub fn predict(&self, x: &[f64]) -> Result<(u8, f64)> {
        let jll = self.joint_log_likelihood(x)?;
        let post = self.posterior(x)?;
        if jll[1] > jll[0] {
            Ok((1, post[1]))
        } else {
            Ok((0, post[0]))
        }
    }
}

pub fn predict_nb(model: &GaussianNbModel, x: &[f64]) -> Result<(u8, f64)> {
    model.predict(x)
}
