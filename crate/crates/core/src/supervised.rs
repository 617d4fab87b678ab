//! Supervised baselines: plain cross-entropy training and training against
//! the negative expected reward of the predicted class distribution.

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nn::{adam_step, init_mlp, softmax, softmax_cross_entropy, AdamState, HyperParams, Mlp};
use crate::rl::RewardMatrix;
use crate::seeded_rng;
use crate::signal::FaultClass;

#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    /// Softmax cross-entropy, optionally weighted per true class.
    CrossEntropy { class_weights: Option<[f64; 3]> },
    /// `-Σₐ softmax(z)ₐ · R[actual][a]`.
    ExpectedReward(RewardMatrix),
}

impl LossKind {
    pub fn cross_entropy() -> Self {
        LossKind::CrossEntropy { class_weights: None }
    }

    /// Loss and its gradient with respect to the logits for one example.
    pub fn eval(&self, logits: &[f64], actual: FaultClass) -> Result<(f64, Vec<f64>)> {
        match self {
            LossKind::CrossEntropy { class_weights } => {
                let w = class_weights.map_or(1.0, |w| w[actual.index()]);
                softmax_cross_entropy(logits, actual.index(), w)
            }
            LossKind::ExpectedReward(m) => Ok(expected_reward_loss(logits, actual, m)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hp: HyperParams,
    pub loss: LossKind,
}

/// Negative expected reward under the softmax distribution, with gradient
/// `∂L/∂z_k = p_k·(E − R_k)` where `E = Σₐ p_a·R_a`.
pub fn expected_reward_loss(logits: &[f64], actual: FaultClass, matrix: &RewardMatrix) -> (f64, Vec<f64>) {
    let p = softmax(logits);
    let row = matrix.row(actual);
    let expected: f64 = p.iter().zip(row).map(|(p, r)| p * r).sum();
    let grad = p.iter().zip(row).map(|(p, r)| p * (expected - r)).collect();
    (-expected, grad)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: Mlp,
    /// Mean per-example loss of each epoch, measured during the epoch.
    pub epoch_losses: Vec<f64>,
}

/// Minibatch Adam training; a short final batch is kept. Deterministic given
/// `seed`.
pub fn train_ann(train: &Dataset, cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    cfg.hp.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidParam("training set is empty".into()));
    }
    if let LossKind::CrossEntropy { class_weights: Some(w) } = &cfg.loss {
        if w.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParam("class weights must be non-negative".into()));
        }
    }
    let mut net = init_mlp(train.dim(), FaultClass::COUNT, seed)?;
    let mut adam = AdamState::new(&net);
    let mut rng = seeded_rng(seed, 1);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch = Vec::new();
    let mut epoch_losses = Vec::with_capacity(cfg.hp.epochs);

    for _ in 0..cfg.hp.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.hp.batch_size) {
            train.gather(chunk, &mut batch);
            let pass = net.forward_batch(&batch, chunk.len())?;
            let outputs = net.num_outputs();
            let mut grad = Vec::with_capacity(chunk.len() * outputs);
            for (b, &i) in chunk.iter().enumerate() {
                let logits = &pass.output()[b * outputs..(b + 1) * outputs];
                let (loss, g) = cfg.loss.eval(logits, train.label(i))?;
                total += loss;
                grad.extend_from_slice(&g);
            }
            let grads = net.backward(&batch, &pass, &grad)?;
            adam_step(&mut net, &grads, &mut adam, cfg.hp.learning_rate, &cfg.hp.adam)?;
        }
        epoch_losses.push(total / train.len() as f64);
    }
    if !net.is_finite() {
        return Err(Error::InvalidParam("training diverged (non-finite parameters)".into()));
    }
    Ok(TrainOutcome { net, epoch_losses })
}

/// Greedy predictions in input order.
pub fn evaluate_model(net: &Mlp, test: &Dataset) -> Result<Vec<FaultClass>> {
    if test.is_empty() {
        return Err(Error::InvalidParam("test set is empty".into()));
    }
    test.rows().map(|row| net.predict(row)).collect()
}
