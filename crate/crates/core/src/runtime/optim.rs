//! Gradient-descent updates with global-norm clipping.

use std::collections::HashMap;

use crate::autograd::Params;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimKind {
    Sgd,
    Adam,
}

impl OptimKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimKind::Sgd => "sgd",
            OptimKind::Adam => "adam",
        }
    }

    pub fn parse(s: &str) -> Option<OptimKind> {
        match s {
            "sgd" => Some(OptimKind::Sgd),
            "adam" => Some(OptimKind::Adam),
            _ => None,
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Applies clipped gradient updates to a parameter set.  Parameters that
/// received no gradient in a step (unused by the architecture or by this
/// particular instance) are left untouched, moments included.
pub struct Optimizer {
    kind: OptimKind,
    lr: f64,
    clip: f64,
    m: HashMap<String, Vec<f64>>,
    v: HashMap<String, Vec<f64>>,
    t: HashMap<String, u64>,
}

impl Optimizer {
    pub fn new(kind: OptimKind, lr: f64, clip: f64) -> Optimizer {
        assert!(lr > 0.0, "learning rate must be positive, got {lr}");
        assert!(clip > 0.0, "clip threshold must be positive, got {clip}");
        Optimizer { kind, lr, clip, m: HashMap::new(), v: HashMap::new(), t: HashMap::new() }
    }

    pub fn sgd(lr: f64, clip: f64) -> Optimizer {
        Optimizer::new(OptimKind::Sgd, lr, clip)
    }

    pub fn adam(lr: f64, clip: f64) -> Optimizer {
        Optimizer::new(OptimKind::Adam, lr, clip)
    }

    /// One update from named gradients.  Returns the pre-clip global norm.
    pub fn step(&mut self, params: &mut Params, grads: &[(String, Vec<f64>)]) -> f64 {
        let sq: f64 = grads.iter().flat_map(|(_, g)| g).map(|x| x * x).sum();
        let norm = sq.sqrt();
        let scale = if norm > self.clip { self.clip / norm } else { 1.0 };
        for (name, grad) in grads {
            let data = params.get_mut(name).data_mut();
            assert_eq!(data.len(), grad.len(), "gradient shape mismatch for {name}");
            match self.kind {
                OptimKind::Sgd => {
                    for (p, g) in data.iter_mut().zip(grad) {
                        *p -= self.lr * scale * g;
                    }
                }
                OptimKind::Adam => {
                    let m = self.m.entry(name.clone()).or_insert_with(|| vec![0.0; data.len()]);
                    let v = self.v.entry(name.clone()).or_insert_with(|| vec![0.0; data.len()]);
                    let t = self.t.entry(name.clone()).or_insert(0);
                    *t += 1;
                    let bc1 = 1.0 - BETA1.powi(*t as i32);
                    let bc2 = 1.0 - BETA2.powi(*t as i32);
                    for i in 0..data.len() {
                        let g = scale * grad[i];
                        m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
                        v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
                        let m_hat = m[i] / bc1;
                        let v_hat = v[i] / bc2;
                        data[i] -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        norm
    }
}
