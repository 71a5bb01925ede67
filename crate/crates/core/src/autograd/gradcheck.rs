//! Named parameter store and finite-difference gradient checking.
//!
//! [`Params`] is the persistent registry of learnable tensors: the optimizer
//! walks it, checkpoints serialize it, and [`grad_check`] enumerates it.
//! Every learnable must appear in exactly one entry.

use std::collections::HashMap;

use super::graph::{Graph, NodeId};
use super::tensor::Tensor;

/// Ordered, named collection of parameter tensors.  Insertion order is
/// stable and observable (checkpoints and optimizers iterate in it).
#[derive(Clone, Debug, Default)]
pub struct Params {
    entries: Vec<(String, Tensor)>,
    index: HashMap<String, usize>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn insert(&mut self, name: &str, t: Tensor) {
        assert!(
            !self.index.contains_key(name),
            "parameter {name:?} registered twice"
        );
        self.index.insert(name.to_string(), self.entries.len());
        self.entries.push((name.to_string(), t));
    }

    pub fn get(&self, name: &str) -> &Tensor {
        let i = *self.index.get(name).unwrap_or_else(|| panic!("unknown parameter {name:?}"));
        &self.entries[i].1
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        let i = *self.index.get(name).unwrap_or_else(|| panic!("unknown parameter {name:?}"));
        &mut self.entries[i].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.entries.iter_mut().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar elements across all tensors.
    pub fn numel(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.numel()).sum()
    }

    /// Bind every parameter into `g` as a named leaf.
    pub fn bind_all(&self, g: &mut Graph) -> HashMap<String, NodeId> {
        let mut ids = HashMap::with_capacity(self.entries.len());
        for (name, t) in &self.entries {
            ids.insert(name.clone(), g.bind(name, t));
        }
        ids
    }
}

/// Compare analytic gradients against central finite differences.
///
/// `f` builds a scalar loss from the given parameters on a fresh graph,
/// binding (via [`Graph::bind`]) every parameter it uses.  Returns the worst
/// relative error `|a - n| / max(|a|, |n|, floor)` over every element of
/// every parameter, where `floor = 1e-6 · max(1, |loss|)`.  The floor keeps
/// near-zero gradients from being judged against central-difference
/// cancellation noise; that noise is a few ulps of the *loss* divided by the
/// step, so the floor must grow with the loss magnitude (measured: ~7 ulps,
/// i.e. 4e-10 at a loss of 20 with a 1e-5 step — far above an absolute 1e-6
/// floor's resolution).  Anything large enough to influence training is
/// still compared at full relative precision.  Cost is two forward passes
/// per element, so callers use small dimensions.  `f` must be deterministic;
/// enabling dropout is a precondition violation and panics.
pub fn grad_check<F>(params: &Params, step: f64, f: F) -> f64
where
    F: Fn(&Params, &mut Graph) -> NodeId,
{
    assert!(step > 0.0, "grad_check step must be positive");

    // Analytic pass.
    let mut g = Graph::new(0);
    let loss = f(params, &mut g);
    assert!(
        !g.dropout_was_active(),
        "grad_check requires a deterministic loss; disable dropout"
    );
    let floor = 1e-6 * g.value(loss).item().abs().max(1.0);
    g.backward(loss);
    let mut analytic: HashMap<String, Vec<f64>> = HashMap::new();
    for (name, id) in g.bindings() {
        let grad = g
            .grad(*id)
            .map(|s| s.to_vec())
            .unwrap_or_else(|| vec![0.0; g.value(*id).numel()]);
        let prev = analytic.insert(name.clone(), grad);
        assert!(prev.is_none(), "parameter {name:?} bound twice in grad_check closure");
    }

    let eval = |p: &Params| -> f64 {
        let mut g = Graph::new(0);
        let loss = f(p, &mut g);
        g.value(loss).item()
    };

    let mut work = params.clone();
    let mut worst = 0.0f64;
    for (name, t) in params.iter() {
        let zeros;
        let ana = match analytic.get(name) {
            Some(a) => a,
            None => {
                // Parameter not bound by f: treat its gradient as zero.
                zeros = vec![0.0; t.numel()];
                &zeros
            }
        };
        for i in 0..t.numel() {
            let orig = t.data()[i];
            work.get_mut(name).data_mut()[i] = orig + step;
            let up = eval(&work);
            work.get_mut(name).data_mut()[i] = orig - step;
            let down = eval(&work);
            work.get_mut(name).data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * step);
            let denom = ana[i].abs().max(numeric.abs()).max(floor);
            worst = worst.max((ana[i] - numeric).abs() / denom);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_is_exact_to_machine_precision() {
        let mut p = Params::new();
        p.insert("w", Tensor::matrix(3, 2, vec![0.5, -0.2, 0.1, 0.9, -0.7, 0.3]));
        let err = grad_check(&p, 1e-5, |p, g| {
            let w = g.bind("w", p.get("w"));
            let x = g.leaf(Tensor::vector(vec![1.0, -2.0, 0.5]));
            let y = g.matmul(x, w);
            g.sum(y)
        });
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn softmax_chain_within_tolerance() {
        let mut p = Params::new();
        p.insert("w", Tensor::matrix(4, 3, (0..12).map(|i| (i as f64) * 0.13 - 0.7).collect()));
        p.insert("b", Tensor::vector(vec![0.1, -0.1, 0.05]));
        let err = grad_check(&p, 1e-5, |p, g| {
            let w = g.bind("w", p.get("w"));
            let b = g.bind("b", p.get("b"));
            let x = g.leaf(Tensor::vector(vec![0.4, -0.9, 1.1, 0.2]));
            let h = g.matmul(x, w);
            let hb = g.add(h, b);
            let sm = g.softmax(hb);
            g.nll_loss(sm, 1)
        });
        assert!(err <= 1e-4, "err = {err}");
    }

    #[test]
    fn unused_parameter_gets_zero_gradient() {
        let mut p = Params::new();
        p.insert("used", Tensor::vector(vec![0.3, 0.4]));
        p.insert("unused", Tensor::vector(vec![5.0]));
        let err = grad_check(&p, 1e-5, |p, g| {
            let w = g.bind("used", p.get("used"));
            let sq = g.mul(w, w);
            g.sum(sq)
        });
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    #[should_panic(expected = "disable dropout")]
    fn rejects_active_dropout() {
        let mut p = Params::new();
        p.insert("w", Tensor::vector(vec![1.0, 2.0]));
        grad_check(&p, 1e-5, |p, g| {
            let w = g.bind("w", p.get("w"));
            let d = g.dropout(w, 0.5, true);
            g.sum(d)
        });
    }

    #[test]
    #[should_panic(expected = "registered twice")]
    fn duplicate_registration_panics() {
        let mut p = Params::new();
        p.insert("w", Tensor::scalar(1.0));
        p.insert("w", Tensor::scalar(2.0));
    }
}
