use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{RewardMatrix, RewardSum};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::signal::FaultClass;

/// Classification posed as a sequential decision problem.
///
/// An episode is one shuffled pass over the examples. The agent sees an
/// example, names a class, is paid from the reward matrix, and is shown the
/// next example of the pass; the episode ends after the last one.
#[derive(Debug, Clone)]
pub struct ClassificationEnv {
    states: Vec<Arc<[f64]>>,
    labels: Vec<FaultClass>,
    matrix: RewardMatrix,
    order: Vec<usize>,
    cursor: usize,
    done: bool,
    episode_reward: RewardSum,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub reward: f64,
    /// True class of the state the action answered.
    pub actual: FaultClass,
    /// `None` once the pass is complete.
    pub next_state: Option<Arc<[f64]>>,
    pub done: bool,
}

impl ClassificationEnv {
    pub fn new(data: &Dataset, matrix: RewardMatrix, rng: ChaCha8Rng) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidParam("environment needs at least one example".into()));
        }
        Ok(Self {
            states: data.rows().map(Arc::from).collect(),
            labels: data.labels().to_vec(),
            matrix,
            order: (0..data.len()).collect(),
            cursor: 0,
            done: true,
            episode_reward: RewardSum::default(),
            rng,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn matrix(&self) -> &RewardMatrix {
        &self.matrix
    }

    /// Starts a new pass in a fresh seeded order and returns its first state.
    pub fn reset(&mut self) -> Arc<[f64]> {
        self.order.shuffle(&mut self.rng);
        self.cursor = 0;
        self.done = false;
        self.episode_reward = RewardSum::default();
        Arc::clone(&self.states[self.order[0]])
    }

    /// Reward collected so far in the current (or just finished) pass.
    pub fn episode_reward(&self) -> f64 {
        self.episode_reward.value()
    }

    pub fn current_label(&self) -> Option<FaultClass> {
        (!self.done).then(|| self.labels[self.order[self.cursor]])
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::StepAfterDone);
        }
        if action >= FaultClass::COUNT {
            return Err(Error::IndexOutOfRange {
                index: action,
                len: FaultClass::COUNT,
            });
        }
        let actual = self.labels[self.order[self.cursor]];
        let reward = self.matrix.reward(actual, action);
        self.episode_reward.add(reward);
        self.cursor += 1;
        let next_state = if self.cursor < self.order.len() {
            Some(Arc::clone(&self.states[self.order[self.cursor]]))
        } else {
            self.done = true;
            None
        };
        Ok(StepOutcome {
            reward,
            actual,
            next_state,
            done: self.done,
        })
    }
}
