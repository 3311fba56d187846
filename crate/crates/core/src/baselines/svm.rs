//! RBF-kernel support vector machine trained by sequential minimal
//! optimization.
//!
//! Each step optimizes the pair of multipliers that violates the KKT
//! conditions most, with the partner picked by second-order gain. Steps stop
//! once the violation gap is within `tolerance`; the gradient is then
//! recomputed exactly and the loop resumes if drift left a violation, at most
//! `max_passes` times. The bias is centred in the interval the final
//! multipliers allow, which keeps every point within `tolerance` of its KKT
//! condition.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedRecord;
use crate::error::{Error, Result};

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape("rbf kernel", a.len(), b.len()));
    }
    if !(gamma > 0.0) {
        return Err(Error::Contract(format!("rbf gamma must be positive, got {gamma}")));
    }
    Ok(rbf(a, b, gamma))
}

#[inline]
fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    /// Kernel width; `None` means `1 / feature count`.
    pub gamma: Option<f64>,
    pub tolerance: f64,
    /// Exact gradient refreshes allowed before giving up.
    pub max_passes: usize,
    /// Hard cap on pair updates.
    pub max_iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            gamma: None,
            tolerance: 1e-3,
            max_passes: 10,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// Multipliers of the stored support vectors, each in `(0, C]`.
    pub alphas: Vec<f64>,
    /// `alpha_i * y_i` with `y_i` in `{-1, +1}`.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub converged: bool,
    /// Largest KKT violation over the training set at exit.
    pub max_kkt_violation: f64,
    pub iterations: usize,
}

impl SvmModel {
    /// Signed decision value `Σ coef_i K(sv_i, x) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        let width = self.support_vectors.first().map_or(x.len(), Vec::len);
        if x.len() != width {
            return Err(Error::shape("svm input", width, x.len()));
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * rbf(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias)
    }

    /// Class (positive margin is an attack, zero goes to normal) and margin.
    pub fn predict(&self, x: &[f64]) -> Result<(u8, f64)> {
        let f = self.decision(x)?;
        Ok((u8::from(f > 0.0), f))
    }
}

pub fn predict_svm(model: &SvmModel, x: &[f64]) -> Result<(u8, f64)> {
    model.predict(x)
}

struct Smo<'a> {
    xs: Vec<&'a [f64]>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    /// Gradient of the dual objective: `y_t Σ_j alpha_j y_j K(x_j, x_t) - 1`.
    grad: Vec<f64>,
    c: f64,
    gamma: f64,
    /// Scan order; only decides ties.
    order: Vec<usize>,
    row_i: Vec<f64>,
    row_j: Vec<f64>,
}

/// Smallest curvature used for a pair of identical points.
const TAU: f64 = 1e-12;

impl Smo<'_> {
    /// Multipliers that may move in the direction that increases `y_t alpha_t`.
    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    fn score(&self, t: usize) -> f64 {
        -self.y[t] * self.grad[t]
    }

    /// `(max over up, min over low)` of the scores; infinite when a set is empty.
    fn extremes(&self) -> (f64, f64) {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for t in 0..self.xs.len() {
            let v = self.score(t);
            if self.in_up(t) {
                hi = hi.max(v);
            }
            if self.in_low(t) {
                lo = lo.min(v);
            }
        }
        (hi, lo)
    }

    fn fill_row(xs: &[&[f64]], i: usize, gamma: f64, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = rbf(xs[i], xs[k], gamma);
        }
    }

    /// Maximal violating pair, the partner chosen by second-order gain.
    /// `None` once the violation gap is within `tol`.
    fn select(&mut self, tol: f64) -> Option<(usize, usize)> {
        let mut m = f64::NEG_INFINITY;
        let mut best_i = None;
        for &t in &self.order {
            if self.in_up(t) && self.score(t) > m {
                m = self.score(t);
                best_i = Some(t);
            }
        }
        let i = best_i?;
        Self::fill_row(&self.xs, i, self.gamma, &mut self.row_i);
        let mut lowest = f64::INFINITY;
        let mut best_gain = f64::INFINITY;
        let mut best_j = None;
        for &t in &self.order {
            if !self.in_low(t) {
                continue;
            }
            let v = self.score(t);
            lowest = lowest.min(v);
            if v < m {
                let b = m - v;
                let a = (2.0 - 2.0 * self.row_i[t]).max(TAU);
                let gain = -(b * b) / a;
                if gain < best_gain {
                    best_gain = gain;
                    best_j = Some(t);
                }
            }
        }
        if m - lowest <= tol {
            return None;
        }
        best_j.map(|j| (i, j))
    }

    /// Jointly optimize `alpha_i` and `alpha_j`; `row_i` must hold `K(x_i, ·)`.
    fn take_step(&mut self, i: usize, j: usize) {
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let (yi, yj) = (self.y[i], self.y[j]);
        // E_i - E_j; the bias cancels
        let diff = yi * self.grad[i] - yj * self.grad[j];
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (self.c + aj - ai).min(self.c))
        } else {
            ((ai + aj - self.c).max(0.0), (ai + aj).min(self.c))
        };
        let eta = (2.0 - 2.0 * self.row_i[j]).max(TAU);
        let s = yi * yj;
        let mut aj_new = (aj + yj * diff / eta).clamp(lo, hi);
        let mut ai_new = ai + s * (aj - aj_new);
        // residue next to a bound would keep the pair "free" yet unable to move
        let snap = 1e-12 * self.c;
        if ai_new < snap {
            ai_new = 0.0;
            aj_new = aj + s * ai;
        } else if ai_new > self.c - snap {
            ai_new = self.c;
            aj_new = aj - s * (self.c - ai);
        }
        if aj_new < snap {
            aj_new = 0.0;
        } else if aj_new > self.c - snap {
            aj_new = self.c;
        }
        let ai_new = ai_new.clamp(0.0, self.c);
        let (dai, daj) = (ai_new - ai, aj_new - aj);

        Self::fill_row(&self.xs, j, self.gamma, &mut self.row_j);
        let (si, sj) = (yi * dai, yj * daj);
        for t in 0..self.xs.len() {
            self.grad[t] += self.y[t] * (si * self.row_i[t] + sj * self.row_j[t]);
        }
        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
    }

    /// Recompute the gradient from the multipliers, discarding drift.
    fn refresh(&mut self) {
        let n = self.xs.len();
        let support: Vec<usize> = (0..n).filter(|&k| self.alpha[k] > 0.0).collect();
        for t in 0..n {
            let f: f64 = support
                .iter()
                .map(|&k| self.alpha[k] * self.y[k] * rbf(self.xs[k], self.xs[t], self.gamma))
                .sum();
            self.grad[t] = self.y[t] * f - 1.0;
        }
    }

    /// Bias centred in the feasible interval, and the largest KKT violation
    /// it leaves. Call after [`Smo::refresh`].
    fn bias_and_violation(&self) -> (f64, f64) {
        let (hi, lo) = self.extremes();
        let b = match (hi.is_finite(), lo.is_finite()) {
            (true, true) => 0.5 * (hi + lo),
            (true, false) => hi,
            (false, true) => lo,
            (false, false) => 0.0,
        };
        let worst = (0..self.xs.len())
            .map(|t| {
                // y f(x) - 1 = grad + y b
                let r = self.grad[t] + self.y[t] * b;
                kkt_gap(r, self.alpha[t], self.c)
            })
            .fold(0.0, f64::max);
        (b, worst)
    }
}

/// KKT violation of one point given `r = y·f(x) - 1`.
fn kkt_gap(r: f64, alpha: f64, c: f64) -> f64 {
    let mut gap: f64 = 0.0;
    if alpha < c {
        gap = gap.max(-r);
    }
    if alpha > 0.0 {
        gap = gap.max(r);
    }
    gap
}

pub fn train_svm(data: &[EncodedRecord], config: &SvmConfig, seed: u64) -> Result<SvmModel> {
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(Error::Contract(format!(
            "SVM regularization C must be positive, got {}",
            config.c
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = data[0].x.len();
    if let Some(bad) = data.iter().find(|r| r.x.len() != width) {
        return Err(Error::shape("svm training width", width, bad.x.len()));
    }
    let gamma = config.gamma.unwrap_or(1.0 / width as f64);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Contract(format!("rbf gamma must be positive, got {gamma}")));
    }
    if !(config.tolerance > 0.0) {
        return Err(Error::Config("SVM tolerance must be positive".into()));
    }
    let positives = data.iter().filter(|r| r.y == 1).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::Training("SVM needs both classes in the training data".into()));
    }

    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut smo = Smo {
        xs: data.iter().map(|r| r.x.as_slice()).collect(),
        y: data.iter().map(|r| if r.y == 1 { 1.0 } else { -1.0 }).collect(),
        alpha: vec![0.0; n],
        grad: vec![-1.0; n],
        c: config.c,
        gamma,
        order,
        row_i: vec![0.0; n],
        row_j: vec![0.0; n],
    };
    let mut iterations = 0;
    let mut refreshes = 0;
    let (bias, max_kkt_violation) = loop {
        while iterations < config.max_iterations {
            match smo.select(config.tolerance) {
                Some((i, j)) => smo.take_step(i, j),
                None => break,
            }
            iterations += 1;
        }
        smo.refresh();
        refreshes += 1;
        let (b, worst) = smo.bias_and_violation();
        if worst <= config.tolerance || iterations >= config.max_iterations || refreshes >= config.max_passes {
            break (b, worst);
        }
    };
    let converged = max_kkt_violation <= config.tolerance;
    if !converged {
        log::warn!(
            "SMO stopped after {iterations} pair updates without converging (max KKT violation {max_kkt_violation:.3e})"
        );
    }

    let mut model = SvmModel {
        support_vectors: Vec::new(),
        alphas: Vec::new(),
        coefficients: Vec::new(),
        bias,
        gamma,
        c: config.c,
        converged,
        max_kkt_violation,
        iterations,
    };
    for i in 0..n {
        if smo.alpha[i] > 0.0 {
            model.support_vectors.push(data[i].x.clone());
            model.alphas.push(smo.alpha[i]);
            model.coefficients.push(smo.alpha[i] * smo.y[i]);
        }
    }
    Ok(model)
}

/// Largest KKT violation of `model` on `data`, recomputing decision values.
pub fn kkt_violation(model: &SvmModel, data: &[EncodedRecord]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in data {
        let y = if r.y == 1 { 1.0 } else { -1.0 };
        let f = model.decision(&r.x)?;
        let alpha = model
            .support_vectors
            .iter()
            .position(|sv| sv == &r.x)
            .map_or(0.0, |k| model.alphas[k]);
        worst = worst.max(kkt_gap(y * f - 1.0, alpha, model.c));
    }
    Ok(worst)
}
