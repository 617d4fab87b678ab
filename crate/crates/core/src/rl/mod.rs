//! Classification as reinforcement learning: reward matrices, the episodic
//! environment, epsilon-greedy exploration, experience replay and DQN
//! training.

mod dqn;
mod env;
mod policy;
mod replay;
mod reward;

pub use dqn::{dqn_train_epoch, dqn_train_timestep, q_target, DqnConfig, DqnOutcome, EpisodeRecord, StepRecord};
pub use env::{ClassificationEnv, StepOutcome};
pub use policy::{select_action, EpsilonSchedule};
pub use replay::{ReplayBuffer, Transition, DEFAULT_CAPACITY};
pub use reward::{default_reward_matrix, reward_lookup, RewardMatrix, RewardSum};
