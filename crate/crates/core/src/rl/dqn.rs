//! Deep Q-learning on the classification environment.
//!
//! Both training regimes share one inner loop: act epsilon-greedily, store the
//! transition, and once the buffer holds a batch take one Adam step on the
//! squared Bellman error of the sampled actions. They differ only in what
//! bounds the outer loop: a number of full passes (episodes) or a number of
//! environment steps.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use super::{select_action, ClassificationEnv, EpsilonSchedule, ReplayBuffer, RewardMatrix, RewardSum, Transition};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nn::{adam_step, init_mlp, squared_q_error, AdamState, HyperParams, Mlp};
use crate::seeded_rng;
use crate::signal::FaultClass;

/// Bellman backup: `reward` at a terminal state, else `reward + γ·max(next_q)`.
pub fn q_target(reward: f64, next_q: Option<&[f64]>, gamma: f64) -> f64 {
    match next_q {
        None => reward,
        Some(q) => reward + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub hp: HyperParams,
    pub buffer_capacity: usize,
    /// Copy the online network into a frozen target network every this many
    /// gradient steps. `None` bootstraps from the online network.
    pub target_sync_interval: Option<usize>,
    /// Keep a per-step record of (actual, action, reward).
    pub record_trace: bool,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hp: HyperParams::default(),
            buffer_capacity: super::replay::DEFAULT_CAPACITY,
            target_sync_interval: None,
            record_trace: false,
        }
    }
}

impl DqnConfig {
    pub fn schedule(&self) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.hp.epsilon_start,
            decay: self.hp.epsilon_decay,
            floor: self.hp.epsilon_min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    pub cumulative_reward: f64,
    pub epsilon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub episode: usize,
    pub actual: FaultClass,
    pub action: usize,
    pub reward: f64,
}

#[derive(Debug, Clone)]
pub struct DqnOutcome {
    pub net: Mlp,
    /// Completed episodes only.
    pub episodes: Vec<EpisodeRecord>,
    /// Environment steps taken.
    pub timesteps: usize,
    /// Reward summed over every step taken, including an unfinished final
    /// episode.
    pub total_reward: f64,
    /// Reward of the unfinished final episode (zero when the run ended on an
    /// episode boundary).
    pub partial_episode_reward: f64,
    pub gradient_steps: usize,
    pub trace: Vec<StepRecord>,
}

enum Budget {
    Episodes(usize),
    Timesteps(usize),
}

/// Episode-bounded training: `hp.epochs` full passes over `train`.
pub fn dqn_train_epoch(train: &Dataset, cfg: &DqnConfig, matrix: &RewardMatrix, seed: u64) -> Result<DqnOutcome> {
    run(train, cfg, matrix, Budget::Episodes(cfg.hp.epochs), seed)
}

/// Step-bounded training: `total_timesteps` environment interactions with
/// automatic resets; an unfinished last episode is left out of the log.
pub fn dqn_train_timestep(
    train: &Dataset,
    cfg: &DqnConfig,
    matrix: &RewardMatrix,
    total_timesteps: usize,
    seed: u64,
) -> Result<DqnOutcome> {
    if total_timesteps == 0 {
        return Err(Error::InvalidParam("total_timesteps must be at least 1".into()));
    }
    run(train, cfg, matrix, Budget::Timesteps(total_timesteps), seed)
}

struct Learner {
    net: Mlp,
    target: Option<Mlp>,
    adam: AdamState,
    buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    hp: HyperParams,
    sync_every: Option<usize>,
    updates: usize,
    states: Vec<f64>,
    next_states: Vec<f64>,
}

impl Learner {
    fn update(&mut self) -> Result<()> {
        let batch = self.hp.batch_size;
        let idx = self.buffer.sample_indices(batch, &mut self.rng)?;
        let picked: Vec<&Transition> = idx.iter().map(|&i| self.buffer.get(i)).collect();

        self.states.clear();
        self.next_states.clear();
        let mut live = Vec::with_capacity(batch);
        for (b, t) in picked.iter().enumerate() {
            self.states.extend_from_slice(&t.state);
            if let Some(next) = &t.next_state {
                self.next_states.extend_from_slice(next);
                live.push(b);
            }
        }

        let outputs = self.net.num_outputs();
        let mut next_q: Vec<Option<&[f64]>> = vec![None; batch];
        let next_pass;
        if !live.is_empty() {
            let bootstrap = self.target.as_ref().unwrap_or(&self.net);
            next_pass = bootstrap.forward_batch(&self.next_states, live.len())?;
            for (k, &b) in live.iter().enumerate() {
                next_q[b] = Some(&next_pass.output()[k * outputs..(k + 1) * outputs]);
            }
        }

        let pass = self.net.forward_batch(&self.states, batch)?;
        let mut grad = Vec::with_capacity(batch * outputs);
        for (b, t) in picked.iter().enumerate() {
            let y = q_target(t.reward, next_q[b], self.hp.gamma);
            let q = &pass.output()[b * outputs..(b + 1) * outputs];
            let (_, g) = squared_q_error(q, t.action, y)?;
            grad.extend_from_slice(&g);
        }
        let grads = self.net.backward(&self.states, &pass, &grad)?;
        adam_step(
            &mut self.net,
            &grads,
            &mut self.adam,
            self.hp.learning_rate,
            &self.hp.adam,
        )?;

        self.updates += 1;
        if let Some(every) = self.sync_every {
            if self.updates.is_multiple_of(every) {
                self.target = Some(self.net.clone());
            }
        }
        Ok(())
    }
}

fn run(train: &Dataset, cfg: &DqnConfig, matrix: &RewardMatrix, budget: Budget, seed: u64) -> Result<DqnOutcome> {
    cfg.hp.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidParam("training set is empty".into()));
    }
    if cfg.target_sync_interval == Some(0) {
        return Err(Error::InvalidParam("target_sync_interval must be at least 1".into()));
    }
    let net = init_mlp(train.dim(), FaultClass::COUNT, seed)?;
    let mut env = ClassificationEnv::new(train, *matrix, seeded_rng(seed, 1))?;
    let mut policy_rng = seeded_rng(seed, 2);
    let mut learner = Learner {
        target: cfg.target_sync_interval.map(|_| net.clone()),
        adam: AdamState::new(&net),
        net,
        buffer: ReplayBuffer::new(cfg.buffer_capacity)?,
        rng: seeded_rng(seed, 3),
        hp: cfg.hp,
        sync_every: cfg.target_sync_interval,
        updates: 0,
        states: Vec::new(),
        next_states: Vec::new(),
    };
    let schedule = cfg.schedule();

    let mut episodes = Vec::new();
    let mut trace = Vec::new();
    let mut timesteps = 0;
    let mut total_reward = RewardSum::default();
    let mut episode_reward = RewardSum::default();
    let mut episode_steps = 0;

    let finished = |episodes: &Vec<EpisodeRecord>, timesteps: usize| match budget {
        Budget::Episodes(n) => episodes.len() >= n,
        Budget::Timesteps(n) => timesteps >= n,
    };

    let mut state: Arc<[f64]> = env.reset();
    while !finished(&episodes, timesteps) {
        let episode = episodes.len();
        let epsilon = schedule.value(episode);
        let action = select_action(&learner.net, &state, epsilon, &mut policy_rng)?;
        let out = env.step(action)?;
        timesteps += 1;
        total_reward.add(out.reward);
        episode_reward.add(out.reward);
        episode_steps += 1;
        if cfg.record_trace {
            trace.push(StepRecord {
                episode: episode + 1,
                actual: out.actual,
                action,
                reward: out.reward,
            });
        }

        learner.buffer.push(Transition {
            state: Arc::clone(&state),
            action,
            reward: out.reward,
            next_state: out.next_state.clone(),
            done: out.done,
        });
        if learner.buffer.len() >= cfg.hp.batch_size {
            learner.update()?;
        }

        match out.next_state {
            Some(next) => state = next,
            None => {
                episodes.push(EpisodeRecord {
                    episode: episode + 1,
                    cumulative_reward: episode_reward.value(),
                    epsilon,
                    steps: episode_steps,
                });
                episode_reward = RewardSum::default();
                episode_steps = 0;
                state = env.reset();
            }
        }
    }

    if !learner.net.is_finite() {
        return Err(Error::InvalidParam(
            "training diverged (non-finite network parameters)".into(),
        ));
    }
    Ok(DqnOutcome {
        net: learner.net,
        episodes,
        timesteps,
        total_reward: total_reward.value(),
        partial_episode_reward: episode_reward.value(),
        gradient_steps: learner.updates,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(n: usize) -> Dataset {
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = FaultClass::ALL[i % 3];
            let mut row = [0.0; 3];
            row[c.index()] = 1.0;
            values.extend_from_slice(&row);
            labels.push(c);
        }
        Dataset::new(3, values, labels).unwrap()
    }

    fn quick_cfg(epochs: usize) -> DqnConfig {
        DqnConfig {
            hp: HyperParams {
                epochs,
                batch_size: 8,
                ..HyperParams::default()
            },
            record_trace: true,
            ..DqnConfig::default()
        }
    }

    #[test]
    fn q_target_examples() {
        assert!((q_target(1.0, Some(&[0.5, 2.0, -1.0]), 0.99) - 2.98).abs() < 1e-12);
        assert_eq!(q_target(-1.2, None, 0.99), -1.2);
        assert_eq!(q_target(0.7, Some(&[5.0, 9.0]), 0.0), 0.7);
    }

    #[test]
    fn epoch_log_length_matches_epochs() {
        let out = dqn_train_epoch(&tiny(30), &quick_cfg(4), &RewardMatrix::preset(), 0).unwrap();
        assert_eq!(out.episodes.len(), 4);
        assert_eq!(out.timesteps, 120);
        assert_eq!(out.partial_episode_reward, 0.0);
        assert_eq!(
            out.episodes.iter().map(|e| e.episode).collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn timestep_boundaries() {
        let data = tiny(30);
        let cfg = quick_cfg(0);
        let one = dqn_train_timestep(&data, &cfg, &RewardMatrix::preset(), 30, 1).unwrap();
        assert_eq!(one.episodes.len(), 1);
        let partial = dqn_train_timestep(&data, &cfg, &RewardMatrix::preset(), 75, 1).unwrap();
        assert_eq!(partial.episodes.len(), 2);
        assert_eq!(partial.timesteps, 75);
        assert_eq!(partial.trace.len(), 75);
        assert!(dqn_train_timestep(&data, &cfg, &RewardMatrix::preset(), 0, 1).is_err());
    }

    #[test]
    fn long_budget_episode_count() {
        // A batch larger than the buffer disables learning and keeps this fast.
        let cfg = DqnConfig {
            hp: HyperParams {
                batch_size: 1_000,
                ..HyperParams::default()
            },
            buffer_capacity: 100,
            ..DqnConfig::default()
        };
        let out = dqn_train_timestep(&tiny(600), &cfg, &RewardMatrix::preset(), 160_000, 3).unwrap();
        assert_eq!(out.episodes.len(), 266);
        assert_eq!(out.gradient_steps, 0);
        assert_eq!(out.timesteps, 160_000);
    }

    #[test]
    fn reward_log_accounts_for_every_step() {
        let m = RewardMatrix::shaped();
        let out = dqn_train_timestep(&tiny(20), &quick_cfg(0), &m, 170, 5).unwrap();
        for ep in &out.episodes {
            let sum: f64 = out
                .trace
                .iter()
                .filter(|s| s.episode == ep.episode)
                .map(|s| m.reward(s.actual, s.action))
                .sum();
            assert!((sum - ep.cumulative_reward).abs() < 1e-12);
        }
        let logged: f64 = out.episodes.iter().map(|e| e.cumulative_reward).sum();
        assert!((logged + out.partial_episode_reward - out.total_reward).abs() < 1e-9);
    }

    #[test]
    fn epsilon_decays_per_episode() {
        let out = dqn_train_epoch(&tiny(9), &quick_cfg(5), &RewardMatrix::preset(), 2).unwrap();
        let eps: Vec<f64> = out.episodes.iter().map(|e| e.epsilon).collect();
        let mut expected = vec![1.0f64];
        for k in 1..5 {
            expected.push(expected[k - 1] * 0.995);
        }
        assert_eq!(eps, expected);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = dqn_train_epoch(&tiny(30), &quick_cfg(3), &RewardMatrix::preset(), 9).unwrap();
        let b = dqn_train_epoch(&tiny(30), &quick_cfg(3), &RewardMatrix::preset(), 9).unwrap();
        assert_eq!(a.net, b.net);
        assert_eq!(a.episodes, b.episodes);
    }

    #[test]
    fn target_network_variant_runs() {
        let cfg = DqnConfig {
            target_sync_interval: Some(10),
            ..quick_cfg(3)
        };
        let out = dqn_train_epoch(&tiny(30), &cfg, &RewardMatrix::preset(), 4).unwrap();
        assert!(out.gradient_steps > 0);
        let bad = DqnConfig {
            target_sync_interval: Some(0),
            ..quick_cfg(1)
        };
        assert!(dqn_train_epoch(&tiny(30), &bad, &RewardMatrix::preset(), 4).is_err());
    }

    #[test]
    fn learns_an_obvious_mapping() {
        let data = tiny(60);
        let out = dqn_train_epoch(&data, &quick_cfg(40), &RewardMatrix::preset(), 3).unwrap();
        let correct = (0..data.len())
            .filter(|&i| out.net.predict(data.row(i)).unwrap() == data.label(i))
            .count();
        assert_eq!(correct, data.len());
    }
}
