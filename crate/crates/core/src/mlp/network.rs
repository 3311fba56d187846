use rand::Rng;

use super::activation::ActivationKind;
use super::loss::softmax_in_place;
use super::matrix::{axpy, dot, DenseMatrix};
use crate::error::{Error, Result};

/// Number of output classes (normal, attack).
pub const OUTPUT_CLASSES: usize = 2;

/// Dense feedforward classifier with a softmax output head.
///
/// `weights[l]` maps layer `l` to layer `l + 1` and has shape
/// `(layer_sizes[l + 1], layer_sizes[l])`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    weights: Vec<DenseMatrix>,
    biases: Vec<Vec<f64>>,
    activation: ActivationKind,
}

/// Per-layer values kept by [`MlpModel::forward`] for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// `activations[0]` is the input, the last entry the softmax output.
    pub activations: Vec<Vec<f64>>,
    /// Pre-activation values `W·a + b`, one per weight layer.
    pub pre_activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn probabilities(&self) -> [f64; 2] {
        let out = self.activations.last().expect("non-empty cache");
        [out[0], out[1]]
    }
}

/// Parameter-shaped container used for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<DenseMatrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            weights: model
                .weights
                .iter()
                .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn clear(&mut self) {
        self.weights.iter_mut().for_each(|w| w.fill(0.0));
        self.biases.iter_mut().for_each(|b| b.iter_mut().for_each(|v| *v = 0.0));
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            w.data_mut().iter_mut().for_each(|v| *v *= factor);
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Flat views in the order `w0, b0, w1, b1, ...`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.data(), b.as_slice()])
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

fn validate_layer_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::Config(
            "a network needs at least an input and an output layer".into(),
        ));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Config(format!("layer widths must be positive: {layer_sizes:?}")));
    }
    if *layer_sizes.last().unwrap() != OUTPUT_CLASSES {
        return Err(Error::Config(format!(
            "output layer must have {OUTPUT_CLASSES} units, got {}",
            layer_sizes.last().unwrap()
        )));
    }
    Ok(())
}

/// Layer sizes for `hidden_layers` hidden layers of `nodes` units each.
pub fn layer_sizes_for(inputs: usize, hidden_layers: usize, nodes: usize) -> Result<Vec<usize>> {
    if hidden_layers == 0 || nodes == 0 {
        return Err(Error::Config(format!(
            "hidden layer count and width must be at least 1, got {hidden_layers} x {nodes}"
        )));
    }
    let mut sizes = vec![inputs];
    sizes.extend(std::iter::repeat_n(nodes, hidden_layers));
    sizes.push(OUTPUT_CLASSES);
    Ok(sizes)
}

impl MlpModel {
    /// All-zero parameters.
    pub fn zeros(layer_sizes: &[usize], activation: ActivationKind) -> Result<Self> {
        validate_layer_sizes(layer_sizes)?;
        let weights = layer_sizes.windows(2).map(|w| DenseMatrix::zeros(w[1], w[0])).collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            activation,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init<R: Rng>(layer_sizes: &[usize], activation: ActivationKind, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes, activation)?;
        for w in &mut model.weights {
            let limit = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
            for v in w.data_mut() {
                *v = rng.gen_range(-limit..limit);
            }
        }
        Ok(model)
    }

    pub fn from_parts(
        layer_sizes: Vec<usize>,
        activation: ActivationKind,
        weights: Vec<DenseMatrix>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_layer_sizes(&layer_sizes)?;
        let layers = layer_sizes.len() - 1;
        if weights.len() != layers {
            return Err(Error::shape("weight layer count", layers, weights.len()));
        }
        if biases.len() != layers {
            return Err(Error::shape("bias layer count", layers, biases.len()));
        }
        for l in 0..layers {
            let (rows, cols) = (layer_sizes[l + 1], layer_sizes[l]);
            if weights[l].rows() != rows {
                return Err(Error::shape("weight rows", rows, weights[l].rows()));
            }
            if weights[l].cols() != cols {
                return Err(Error::shape("weight columns", cols, weights[l].cols()));
            }
            if biases[l].len() != rows {
                return Err(Error::shape("bias length", rows, biases[l].len()));
            }
            if biases[l].iter().any(|v| !v.is_finite()) {
                return Err(Error::Contract("bias entries must be finite".into()));
            }
        }
        Ok(MlpModel {
            layer_sizes,
            weights,
            biases,
            activation,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn weights(&self) -> &[DenseMatrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [DenseMatrix] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.data().len()).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Mutable flat views in the order `w0, b0, w1, b1, ...`.
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w.data_mut(), b.as_mut_slice()])
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardCache> {
        let mut ws = BatchWorkspace::new(self, 1);
        self.forward_batch(&[x], &mut ws)?;
        let layers = self.weights.len();
        Ok(ForwardCache {
            activations: (0..=layers).map(|l| ws.acts[l].row(0).to_vec()).collect(),
            pre_activations: (0..layers).map(|l| ws.pres[l].row(0).to_vec()).collect(),
        })
    }

    /// Exact gradients of the cross-entropy loss for one sample.
    pub fn backward(&self, cache: &ForwardCache, y: u8) -> Result<Gradients> {
        let layers = self.weights.len();
        if cache.activations.len() != layers + 1 {
            return Err(Error::shape("cached activations", layers + 1, cache.activations.len()));
        }
        if cache.pre_activations.len() != layers {
            return Err(Error::shape(
                "cached pre-activations",
                layers,
                cache.pre_activations.len(),
            ));
        }
        for (l, &n) in self.layer_sizes.iter().enumerate() {
            if cache.activations[l].len() != n {
                return Err(Error::shape("cached activation width", n, cache.activations[l].len()));
            }
            if l > 0 && cache.pre_activations[l - 1].len() != n {
                return Err(Error::shape(
                    "cached pre-activation width",
                    n,
                    cache.pre_activations[l - 1].len(),
                ));
            }
        }
        let mut ws = BatchWorkspace::new(self, 1);
        for l in 0..=layers {
            ws.acts[l].row_mut(0).copy_from_slice(&cache.activations[l]);
        }
        for l in 0..layers {
            ws.pres[l].row_mut(0).copy_from_slice(&cache.pre_activations[l]);
        }
        let mut grads = Gradients::zeros_like(self);
        self.backward_batch(&[y], &mut ws, &mut grads);
        Ok(grads)
    }

    /// Class probabilities `[p(normal), p(attack)]`.
    pub fn probabilities(&self, x: &[f64]) -> Result<[f64; 2]> {
        Ok(self.forward(x)?.probabilities())
    }

    /// Winning class and its probability; ties go to class 0.
    pub fn predict(&self, x: &[f64]) -> Result<(u8, f64)> {
        Ok(decide(self.probabilities(x)?))
    }

    /// Probabilities for many inputs, evaluated in chunks.
    pub fn probabilities_many(&self, xs: &[&[f64]]) -> Result<Vec<[f64; 2]>> {
        const CHUNK: usize = 256;
        let mut ws = BatchWorkspace::new(self, CHUNK.min(xs.len().max(1)));
        let mut out = Vec::with_capacity(xs.len());
        for chunk in xs.chunks(CHUNK) {
            self.forward_batch(chunk, &mut ws)?;
            let probs = ws.acts.last().unwrap();
            out.extend((0..chunk.len()).map(|r| [probs.get(r, 0), probs.get(r, 1)]));
        }
        Ok(out)
    }

    pub(crate) fn forward_batch(&self, xs: &[&[f64]], ws: &mut BatchWorkspace) -> Result<()> {
        let inputs = self.input_width();
        ws.resize(self, xs.len());
        for (r, x) in xs.iter().enumerate() {
            if x.len() != inputs {
                return Err(Error::shape("network input", inputs, x.len()));
            }
            ws.acts[0].row_mut(r).copy_from_slice(x);
        }
        let layers = self.weights.len();
        for l in 0..layers {
            let w = &self.weights[l];
            let b = &self.biases[l];
            let (done, rest) = ws.acts.split_at_mut(l + 1);
            let prev = &done[l];
            let next = &mut rest[0];
            let pre = &mut ws.pres[l];
            for r in 0..ws.batch {
                let a = prev.row(r);
                let z_row = pre.row_mut(r);
                for (j, z) in z_row.iter_mut().enumerate() {
                    *z = b[j] + dot(w.row(j), a);
                }
                let out = next.row_mut(r);
                out.copy_from_slice(pre.row(r));
                if l + 1 == layers {
                    softmax_in_place(out);
                } else {
                    for v in out.iter_mut() {
                        *v = self.activation.apply(*v);
                    }
                }
            }
        }
        Ok(())
    }

    /// Accumulates summed (not averaged) gradients of the batch into `grads`.
    pub(crate) fn backward_batch(&self, ys: &[u8], ws: &mut BatchWorkspace, grads: &mut Gradients) {
        let layers = self.weights.len();
        let batch = ws.batch;
        debug_assert_eq!(ys.len(), batch);
        {
            let out = &ws.acts[layers];
            let delta = &mut ws.deltas[layers - 1];
            for (r, &y) in ys.iter().enumerate() {
                let d = delta.row_mut(r);
                d.copy_from_slice(out.row(r));
                d[usize::from(y.min(1))] -= 1.0;
            }
        }
        for l in (0..layers).rev() {
            let (lower, upper) = ws.deltas.split_at_mut(l);
            let delta = &upper[0];
            let prev = &ws.acts[l];
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for r in 0..batch {
                let d = delta.row(r);
                let a = prev.row(r);
                for (j, &dj) in d.iter().enumerate() {
                    if dj != 0.0 {
                        axpy(dj, a, gw.row_mut(j));
                    }
                    gb[j] += dj;
                }
            }
            if l > 0 {
                let w = &self.weights[l];
                let pre = &ws.pres[l - 1];
                let dprev = &mut lower[l - 1];
                for r in 0..batch {
                    let row = dprev.row_mut(r);
                    row.iter_mut().for_each(|v| *v = 0.0);
                    for (j, &dj) in delta.row(r).iter().enumerate() {
                        if dj != 0.0 {
                            axpy(dj, w.row(j), row);
                        }
                    }
                    for (v, &z) in row.iter_mut().zip(pre.row(r)) {
                        *v *= self.activation.derivative(z);
                    }
                }
            }
        }
    }
}

pub(crate) fn decide(p: [f64; 2]) -> (u8, f64) {
    if p[1] > p[0] {
        (1, p[1])
    } else {
        (0, p[0])
    }
}

/// Scratch buffers for batched forward/backward passes.
pub(crate) struct BatchWorkspace {
    batch: usize,
    acts: Vec<DenseMatrix>,
    pres: Vec<DenseMatrix>,
    deltas: Vec<DenseMatrix>,
}

impl BatchWorkspace {
    pub(crate) fn new(model: &MlpModel, batch: usize) -> Self {
        let sizes = &model.layer_sizes;
        BatchWorkspace {
            batch,
            acts: sizes.iter().map(|&n| DenseMatrix::zeros(batch, n)).collect(),
            pres: sizes[1..].iter().map(|&n| DenseMatrix::zeros(batch, n)).collect(),
            deltas: sizes[1..].iter().map(|&n| DenseMatrix::zeros(batch, n)).collect(),
        }
    }

    fn resize(&mut self, model: &MlpModel, batch: usize) {
        if batch != self.batch {
            *self = BatchWorkspace::new(model, batch);
        }
    }

    pub(crate) fn output(&self, r: usize) -> [f64; 2] {
        let out = self.acts.last().unwrap();
        [out.get(r, 0), out.get(r, 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::loss::cross_entropy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_model_is_uncertain() {
        let model = MlpModel::zeros(&[41, 300, 300, 2], ActivationKind::Sigmoid).unwrap();
        let x = vec![3.7; 41];
        assert_eq!(model.probabilities(&x).unwrap(), [0.5, 0.5]);
        assert_eq!(model.predict(&x).unwrap(), (0, 0.5));
    }

    #[test]
    fn wrong_input_width_is_a_shape_error() {
        let model = MlpModel::zeros(&[41, 5, 2], ActivationKind::Relu).unwrap();
        assert!(matches!(
            model.forward(&[0.0; 40]),
            Err(Error::Shape {
                expected: 41,
                got: 40,
                ..
            })
        ));
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(MlpModel::zeros(&[41, 5, 3], ActivationKind::Relu).is_err());
        assert!(MlpModel::zeros(&[41, 0, 2], ActivationKind::Relu).is_err());
        assert!(MlpModel::zeros(&[2], ActivationKind::Relu).is_err());
        assert!(layer_sizes_for(41, 0, 5).is_err());
        assert_eq!(layer_sizes_for(41, 2, 5).unwrap(), vec![41, 5, 5, 2]);
    }

    /// 2 inputs -> 2 hidden (ReLU) -> 2 outputs, hand-set weights.
    fn toy_model() -> MlpModel {
        let w0 = DenseMatrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let w1 = DenseMatrix::from_vec(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        MlpModel::from_parts(
            vec![2, 2, 2],
            ActivationKind::Relu,
            vec![w0, w1],
            vec![vec![0.0, 0.0], vec![0.0, 0.5]],
        )
        .unwrap()
    }

    #[test]
    fn hand_forward_pass() {
        // hidden = relu([1, -2]) = [1, 0]; logits = [1 - 0, -1 + 0 + 0.5] = [1, -0.5]
        let p = toy_model().probabilities(&[1.0, -2.0]).unwrap();
        let e = (1.5f64).exp();
        assert!((p[0] - e / (1.0 + e)).abs() < 1e-15);
        assert!((p[1] - 1.0 / (1.0 + e)).abs() < 1e-15);
    }

    #[test]
    fn hand_backward_pass() {
        // For the toy model at x = [1, -2], y = 1:
        // p = [s, 1 - s], s = e^1.5 / (1 + e^1.5); output error d2 = [s, -s].
        // dW1 = d2 ⊗ h, h = [1, 0]; db1 = d2.
        // hidden error = W1ᵀ d2 ⊙ relu'(z) = [s·1 + (-s)(-1), ...]·[1, 0] = [2s, 0].
        // dW0 = [2s, 0] ⊗ x; db0 = [2s, 0].
        let model = toy_model();
        let cache = model.forward(&[1.0, -2.0]).unwrap();
        let g = model.backward(&cache, 1).unwrap();
        let s = (1.5f64).exp() / (1.0 + (1.5f64).exp());
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(g.weights[1].get(0, 0), s));
        assert!(close(g.weights[1].get(0, 1), 0.0));
        assert!(close(g.weights[1].get(1, 0), -s));
        assert!(close(g.biases[1][0], s) && close(g.biases[1][1], -s));
        assert!(close(g.weights[0].get(0, 0), 2.0 * s));
        assert!(close(g.weights[0].get(0, 1), -4.0 * s));
        assert!(close(g.weights[0].get(1, 0), 0.0));
        assert!(close(g.biases[0][0], 2.0 * s) && close(g.biases[0][1], 0.0));
    }

    #[test]
    fn perfect_prediction_has_vanishing_gradient() {
        let w0 = DenseMatrix::from_vec(2, 1, vec![0.0, 0.0]).unwrap();
        let model = MlpModel::from_parts(vec![1, 2], ActivationKind::Sigmoid, vec![w0], vec![vec![0.0, 60.0]]).unwrap();
        let cache = model.forward(&[1.0]).unwrap();
        assert!(model.backward(&cache, 1).unwrap().norm() < 1e-20);
    }

    #[test]
    fn stale_cache_rejected() {
        let model = toy_model();
        let other = MlpModel::zeros(&[2, 3, 2], ActivationKind::Relu).unwrap();
        let cache = other.forward(&[0.0, 0.0]).unwrap();
        assert!(matches!(model.backward(&cache, 0), Err(Error::Shape { .. })));
    }

    #[test]
    fn batched_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = MlpModel::init(&[3, 4, 2], ActivationKind::Tanh, &mut rng).unwrap();
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.3, -0.2, 1.0 - i as f64]).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let batch = model.probabilities_many(&refs).unwrap();
        for (x, p) in xs.iter().zip(batch) {
            assert_eq!(model.probabilities(x).unwrap(), p);
        }
    }

    #[test]
    fn loss_is_cross_entropy_of_attack_probability() {
        let model = toy_model();
        let p = model.probabilities(&[1.0, -2.0]).unwrap();
        assert!((cross_entropy(0, p[1]) + p[0].ln()).abs() < 1e-15);
    }
}
