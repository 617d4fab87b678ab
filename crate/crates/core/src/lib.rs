//! Bearing fault diagnosis with supervised and reinforcement-learning
//! classifiers.
//!
//! The crate covers the whole pipeline: loading or synthesizing vibration
//! recordings ([`signal`]), windowing and statistical feature extraction
//! ([`features`]), a from-scratch ReLU network with Adam ([`nn`]), supervised
//! training with cross-entropy or an expected-reward objective
//! ([`supervised`]), DQN training on a classification environment ([`rl`]),
//! metrics and reports ([`eval`]), and end-to-end experiment runs
//! ([`experiment`]).

pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod nn;
pub mod rl;
pub mod signal;
pub mod supervised;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use signal::FaultClass;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent deterministic random stream `stream` derived from `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
