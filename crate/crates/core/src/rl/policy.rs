use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{argmax, Mlp};

/// Multiplicative exploration decay with a floor: `ε(k) = max(start·decayᵏ, floor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            decay: 0.995,
            floor: 0.01,
        }
    }
}

impl EpsilonSchedule {
    /// Exploration rate after `k` decay events.
    ///
    /// Computed as `k` successive multiplications so the value is the same on
    /// every platform and optimization level (`powi` is not).
    pub fn value(&self, k: usize) -> f64 {
        let mut eps = self.start;
        for _ in 0..k {
            if eps <= self.floor {
                break;
            }
            eps *= self.decay;
        }
        eps.max(self.floor)
    }
}

/// Epsilon-greedy choice over the network's outputs.
pub fn select_action<R: Rng + ?Sized>(net: &Mlp, state: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    if rng.gen::<f64>() < epsilon {
        Ok(rng.gen_range(0..net.num_outputs()))
    } else {
        Ok(argmax(&net.forward(state)?))
    }
}
