use serde::{Deserialize, Serialize};

use super::{DenseNet, Gradients};
use crate::error::{Error, Result};

/// Adam with bias correction. Moment buffers share the parameter layout.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Gradients,
    pub second_moment: Gradients,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(net: &DenseNet, learning_rate: f64) -> Self {
        Self {
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(&mut self, net: &mut DenseNet, grads: &Gradients) -> Result<()> {
        if !grads.is_congruent(net) || !self.first_moment.is_congruent(net) {
            return Err(Error::Dimension {
                what: "adam parameter layout",
                expected: net.n_params(),
                actual: grads.iter().count(),
            });
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);

        let n_layers = net.n_layers();
        for k in 0..n_layers {
            update_slice(
                &mut net.weights_mut()[k].data,
                &grads.weights[k].data,
                &mut self.first_moment.weights[k].data,
                &mut self.second_moment.weights[k].data,
                (b1, b2, lr, eps, c1, c2),
            );
            update_slice(
                &mut net.biases_mut()[k],
                &grads.biases[k],
                &mut self.first_moment.biases[k],
                &mut self.second_moment.biases[k],
                (b1, b2, lr, eps, c1, c2),
            );
        }
        Ok(())
    }
}

#[inline]
fn update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    (b1, b2, lr, eps, c1, c2): (f64, f64, f64, f64, f64, f64),
) {
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

/// First-order optimizer bound to one network.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Adam(AdamState),
    Sgd { learning_rate: f64 },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, net: &DenseNet, learning_rate: f64) -> Self {
        match kind {
            OptimizerKind::Adam => Optimizer::Adam(AdamState::new(net, learning_rate)),
            OptimizerKind::Sgd => Optimizer::Sgd { learning_rate },
        }
    }

    pub fn step(&mut self, net: &mut DenseNet, grads: &Gradients) -> Result<()> {
        match self {
            Optimizer::Adam(state) => state.step(net, grads),
            Optimizer::Sgd { learning_rate } => {
                if !grads.is_congruent(net) {
                    return Err(Error::Dimension {
                        what: "sgd parameter layout",
                        expected: net.n_params(),
                        actual: grads.iter().count(),
                    });
                }
                let lr = *learning_rate;
                for k in 0..net.n_layers() {
                    for (p, g) in net.weights_mut()[k]
                        .data
                        .iter_mut()
                        .zip(&grads.weights[k].data)
                    {
                        *p -= lr * g;
                    }
                    for (p, g) in net.biases_mut()[k].iter_mut().zip(&grads.biases[k]) {
                        *p -= lr * g;
                    }
                }
                Ok(())
            }
        }
    }
}
