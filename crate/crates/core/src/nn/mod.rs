//! Fully-connected ReLU network with exact backpropagation and Adam.
//!
//! Every model in the toolkit uses the same three-layer shape: inputs → 128 →
//! 128 → actions, ReLU between layers, raw outputs (logits or Q-values) at the
//! end. Softmax, when needed, lives in the loss head.

mod adam;
mod checkpoint;
pub mod loss;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use loss::{cross_entropy, softmax, softmax_cross_entropy, squared_q_error};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::FaultClass;

pub const HIDDEN_WIDTH: usize = 128;

/// Training hyperparameters shared by all models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub epochs: usize,
    pub adam: AdamConfig,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            batch_size: 64,
            learning_rate: 0.001,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_decay: 0.995,
            epsilon_min: 0.01,
            epochs: 50,
            adam: AdamConfig::default(),
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("discount factor must lie in [0, 1], got {}", self.gamma));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad(format!("epsilon_decay must lie in (0, 1], got {}", self.epsilon_decay));
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_min) {
            return bad("epsilon_start and epsilon_min must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// One fully-connected layer. `weights` is `inputs × outputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 || weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::ShapeMismatch(format!(
                "dense {inputs}x{outputs} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// `out[b] = bias + x[b] · W` for every row of the batch.
    fn forward_into(&self, x: &[f64], batch: usize, out: &mut Vec<f64>) {
        out.clear();
        for _ in 0..batch {
            out.extend_from_slice(&self.bias);
        }
        // Input-major order reuses each weight row across the batch.
        for (i, w) in self.weights.chunks_exact(self.outputs).enumerate() {
            for (b, acc) in out.chunks_exact_mut(self.outputs).enumerate() {
                let xi = x[b * self.inputs + i];
                if xi == 0.0 {
                    continue;
                }
                for (a, &wij) in acc.iter_mut().zip(w) {
                    *a += xi * wij;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Initializes the standard network: `num_features → 128 → 128 → num_actions`.
///
/// Weights are uniform on `±1/sqrt(fan_in)`, biases start at zero.
pub fn init_mlp(num_features: usize, num_actions: usize, seed: u64) -> Result<Mlp> {
    if num_features == 0 {
        return Err(Error::InvalidParam("num_features must be at least 1".into()));
    }
    if num_actions < 2 {
        return Err(Error::InvalidParam("num_actions must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths = [num_features, HIDDEN_WIDTH, HIDDEN_WIDTH, num_actions];
    let layers = widths
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let weights = (0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)).collect();
            Dense {
                inputs: fan_in,
                outputs: fan_out,
                weights,
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(Mlp { layers })
}

/// Cached activations from a batched forward pass, consumed by
/// [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardPass {
    batch: usize,
    /// Post-ReLU activations of each hidden layer.
    hidden: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl ForwardPass {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Raw outputs, `batch × num_outputs`, row-major.
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

impl Mlp {
    /// Builds a network from explicit layers; consecutive widths must chain.
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::ShapeMismatch(format!(
                    "layer output width {} feeds input width {}",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        for l in &layers {
            Dense::new(l.inputs, l.outputs, l.weights.clone(), l.bias.clone())?;
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn num_inputs(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// Flat parameter view in layer order: weights then bias of each layer.
    pub fn param(&self, k: usize) -> f64 {
        let (l, off) = self.locate(k);
        let layer = &self.layers[l];
        if off < layer.weights.len() {
            layer.weights[off]
        } else {
            layer.bias[off - layer.weights.len()]
        }
    }

    pub fn set_param(&mut self, k: usize, value: f64) {
        let (l, off) = self.locate(k);
        let layer = &mut self.layers[l];
        if off < layer.weights.len() {
            layer.weights[off] = value;
        } else {
            let nw = layer.weights.len();
            layer.bias[off - nw] = value;
        }
    }

    fn locate(&self, mut k: usize) -> (usize, usize) {
        for (l, layer) in self.layers.iter().enumerate() {
            if k < layer.param_count() {
                return (l, k);
            }
            k -= layer.param_count();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|p| p.is_finite()))
    }

    fn check_input(&self, inputs: &[f64], batch: usize) -> Result<()> {
        if batch == 0 || inputs.len() != batch * self.num_inputs() {
            return Err(Error::ShapeMismatch(format!(
                "network expects rows of {} inputs, got {} values for a batch of {batch}",
                self.num_inputs(),
                inputs.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(input, 1)?.output)
    }

    pub fn forward_batch(&self, inputs: &[f64], batch: usize) -> Result<ForwardPass> {
        self.check_input(inputs, batch)?;
        let mut hidden: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() - 1);
        let mut output = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let x: &[f64] = if l == 0 { inputs } else { &hidden[l - 1] };
            let mut out = Vec::new();
            layer.forward_into(x, batch, &mut out);
            if l == last {
                output = out;
            } else {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
                hidden.push(out);
            }
        }
        Ok(ForwardPass { batch, hidden, output })
    }

    /// Gradient of the mean batch loss given each example's loss gradient with
    /// respect to the raw outputs (`batch × num_outputs`). The ReLU
    /// derivative at 0 is taken as 0.
    pub fn backward(&self, inputs: &[f64], pass: &ForwardPass, output_grad: &[f64]) -> Result<Gradients> {
        let batch = pass.batch;
        self.check_input(inputs, batch)?;
        if output_grad.len() != batch * self.num_outputs() {
            return Err(Error::ShapeMismatch(format!(
                "output gradient has {} values, expected {}",
                output_grad.len(),
                batch * self.num_outputs()
            )));
        }
        let scale = 1.0 / batch as f64;
        let mut delta: Vec<f64> = output_grad.iter().map(|g| g * scale).collect();
        let mut grads: Vec<Dense> = self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect();

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let x = if l == 0 { inputs } else { &pass.hidden[l - 1] };
            let g = &mut grads[l];
            for d in delta.chunks_exact(layer.outputs) {
                for (gb, &dj) in g.bias.iter_mut().zip(d) {
                    *gb += dj;
                }
            }
            for (i, gw) in g.weights.chunks_exact_mut(layer.outputs).enumerate() {
                for (b, d) in delta.chunks_exact(layer.outputs).enumerate() {
                    let xi = x[b * layer.inputs + i];
                    if xi == 0.0 {
                        continue;
                    }
                    for (gij, &dj) in gw.iter_mut().zip(d) {
                        *gij += xi * dj;
                    }
                }
            }
            if l == 0 {
                break;
            }
            // Propagate through W and the preceding ReLU.
            let mut prev = vec![0.0; batch * layer.inputs];
            for (i, w) in layer.weights.chunks_exact(layer.outputs).enumerate() {
                for (b, d) in delta.chunks_exact(layer.outputs).enumerate() {
                    if x[b * layer.inputs + i] > 0.0 {
                        prev[b * layer.inputs + i] = w.iter().zip(d).map(|(a, b)| a * b).sum();
                    }
                }
            }
            delta = prev;
        }
        Ok(Gradients { layers: grads })
    }

    pub fn predict(&self, input: &[f64]) -> Result<FaultClass> {
        let out = self.forward(input)?;
        FaultClass::from_index(argmax(&out))
            .ok_or_else(|| Error::ShapeMismatch(format!("network has {} outputs, expected 3", out.len())))
    }
}

/// Per-parameter gradients, shape-congruent with the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|p| p.is_finite()))
    }

    fn congruent(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.inputs == l.inputs && g.outputs == l.outputs)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict(net: &Mlp, input: &[f64]) -> Result<FaultClass> {
    net.predict(input)
}
