use super::{Dense, Gradients, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment accumulators plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Dense>,
    v: Vec<Dense>,
    t: u64,
}

impl AdamState {
    pub fn new(net: &Mlp) -> Self {
        let zeros = || {
            net.layers()
                .iter()
                .map(|l| Dense::zeros(l.inputs, l.outputs))
                .collect::<Vec<_>>()
        };
        Self {
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(net: &mut Mlp, grads: &Gradients, state: &mut AdamState, lr: f64, cfg: &AdamConfig) -> Result<()> {
    if !grads.congruent(net) || state.m.len() != net.layers.len() {
        return Err(Error::ShapeMismatch(
            "gradients or optimizer state do not match the network".into(),
        ));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);

    let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    };
    for (((layer, g), m), v) in net
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        update(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights);
        update(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_mlp;

    fn ones_like(net: &Mlp) -> Gradients {
        let mut g = Gradients::zeros_like(net);
        for l in &mut g.layers {
            l.weights.iter_mut().for_each(|w| *w = 1.0);
            l.bias.iter_mut().for_each(|b| *b = 1.0);
        }
        g
    }

    #[test]
    fn first_step_with_unit_gradient() {
        let mut net = init_mlp(2, 3, 0).unwrap();
        let before = net.clone();
        let mut state = AdamState::new(&net);
        let g = ones_like(&net);
        adam_step(&mut net, &g, &mut state, 0.001, &AdamConfig::default()).unwrap();
        assert_eq!(state.steps(), 1);
        let expected = -0.001 / (1.0 + 1e-8);
        for k in 0..net.param_count() {
            let delta = net.param(k) - before.param(k);
            assert!((delta - expected).abs() < 1e-15, "param {k}: {delta}");
        }
        assert!((expected + 0.000999999).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut net = init_mlp(3, 3, 1).unwrap();
        let before = net.clone();
        let mut state = AdamState::new(&net);
        let g = Gradients::zeros_like(&net);
        adam_step(&mut net, &g, &mut state, 0.001, &AdamConfig::default()).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn deterministic() {
        let base = init_mlp(3, 3, 2).unwrap();
        let g = ones_like(&base);
        let run = || {
            let mut net = base.clone();
            let mut st = AdamState::new(&net);
            adam_step(&mut net, &g, &mut st, 0.01, &AdamConfig::default()).unwrap();
            (net, st)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut net = init_mlp(3, 3, 2).unwrap();
        let other = init_mlp(4, 3, 2).unwrap();
        let mut st = AdamState::new(&net);
        assert!(adam_step(
            &mut net,
            &Gradients::zeros_like(&other),
            &mut st,
            0.1,
            &AdamConfig::default()
        )
        .is_err());
    }
}
