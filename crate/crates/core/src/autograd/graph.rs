//! The tape.  Operations append nodes eagerly (forward values are computed
//! at construction time); `backward` sweeps the tape once in reverse.

use std::rc::Rc;

use super::tensor::Tensor;
use super::NLL_EPS;
use crate::rng::Rng;

/// Handle to a node on one specific [`Graph`].  Ids from different graphs
/// must not be mixed; this is not checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    /// Broadcast-add a vector to every row of a matrix.
    AddRows(NodeId, NodeId),
    Tanh(NodeId),
    Sigmoid(NodeId),
    /// Elementwise `a * x + b` with constant coefficients.
    ScaleShift { x: NodeId, a: f64 },
    /// Inverted dropout; `mask` holds `0.0` or `1/(1-rate)` per element.
    Dropout { x: NodeId, mask: Vec<f64> },
    Softmax(NodeId),
    Concat { parts: Vec<NodeId>, axis: usize },
    /// Stack equal-length vectors into a matrix, one per row.
    Stack { parts: Vec<NodeId> },
    /// Select row `idx` of a matrix (embedding lookup).
    Row { m: NodeId, idx: usize },
    Sum(NodeId),
    /// `-ln(dist[target] + NLL_EPS)`.
    Nll { dist: NodeId, target: usize },
    /// Scatter-add vector elements into a `width`-sized vector at `ids`;
    /// repeated ids accumulate.
    Scatter { src: NodeId, ids: Rc<Vec<usize>> },
    /// Multiply every element of `x` by the scalar node `s`.
    MulScalar { s: NodeId, x: NodeId },
}

struct Node {
    value: Tensor,
    grad: Option<Vec<f64>>,
    op: Op,
}

pub struct Graph {
    nodes: Vec<Node>,
    rng: Rng,
    bindings: Vec<(String, NodeId)>,
    dropout_active: bool,
}

// ── kernels ──────────────────────────────────────────────────────────────

/// Dot product with four accumulators; the split chains keep the FPU busy
/// and let LLVM vectorize, which matters — this is the training hot path.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let head = a.len() - a.len() % 4;
    for (x, y) in a[..head].chunks_exact(4).zip(b[..head].chunks_exact(4)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in a[head..].iter().zip(&b[head..]) {
        s += x * y;
    }
    s
}

/// `y += a * x`.
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn add_slices(y: &mut [f64], x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi;
    }
}

impl Graph {
    /// `seed` feeds the graph-local RNG used for dropout masks.
    pub fn new(seed: u64) -> Self {
        Graph { nodes: Vec::new(), rng: Rng::new(seed), bindings: Vec::new(), dropout_active: false }
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, grad: None, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Accumulated gradient of a node, if any `backward` pass reached it.
    pub fn grad(&self, id: NodeId) -> Option<&[f64]> {
        self.nodes[id.0].grad.as_deref()
    }

    /// True if any active (training-time) dropout node was created.
    pub fn dropout_was_active(&self) -> bool {
        self.dropout_active
    }

    /// Named leaves registered through [`Graph::bind`].
    pub fn bindings(&self) -> &[(String, NodeId)] {
        &self.bindings
    }

    // ── node constructors ────────────────────────────────────────────────

    pub fn leaf(&mut self, t: Tensor) -> NodeId {
        self.push(t, Op::Leaf)
    }

    /// Leaf that remembers its name so gradients can be read back out by
    /// name after `backward` (parameter binding).
    pub fn bind(&mut self, name: &str, t: &Tensor) -> NodeId {
        let id = self.leaf(t.clone());
        self.bindings.push((name.to_string(), id));
        id
    }

    pub fn zeros(&mut self, len: usize) -> NodeId {
        self.leaf(Tensor::zeros(&[len]))
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (ta, tb) = (self.value(a), self.value(b));
        let out = match (ta.rank(), tb.rank()) {
            (2, 2) => {
                let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
                assert_eq!(k, tb.rows(), "matmul shape mismatch: {:?} x {:?}", ta.shape(), tb.shape());
                let mut out = vec![0.0; m * n];
                for i in 0..m {
                    let arow = &ta.data()[i * k..(i + 1) * k];
                    let orow = &mut out[i * n..(i + 1) * n];
                    for (p, &av) in arow.iter().enumerate() {
                        axpy(orow, av, &tb.data()[p * n..(p + 1) * n]);
                    }
                }
                Tensor::matrix(m, n, out)
            }
            (1, 2) => {
                let (k, n) = (ta.numel(), tb.cols());
                assert_eq!(k, tb.rows(), "matmul shape mismatch: {:?} x {:?}", ta.shape(), tb.shape());
                let mut out = vec![0.0; n];
                for (p, &av) in ta.data().iter().enumerate() {
                    axpy(&mut out, av, &tb.data()[p * n..(p + 1) * n]);
                }
                Tensor::vector(out)
            }
            (2, 1) => {
                let (m, k) = (ta.rows(), ta.cols());
                assert_eq!(k, tb.numel(), "matmul shape mismatch: {:?} x {:?}", ta.shape(), tb.shape());
                let out = (0..m).map(|i| dot(&ta.data()[i * k..(i + 1) * k], tb.data())).collect();
                Tensor::vector(out)
            }
            _ => panic!("matmul on shapes {:?} x {:?}", ta.shape(), tb.shape()),
        };
        self.push(out, Op::MatMul(a, b))
    }

    fn binary_elementwise(&mut self, a: NodeId, b: NodeId, f: impl Fn(f64, f64) -> f64, op: Op) -> NodeId {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(ta.shape(), tb.shape(), "shape mismatch: {:?} vs {:?}", ta.shape(), tb.shape());
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        let t = Tensor::new(ta.shape().to_vec(), data);
        self.push(t, op)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary_elementwise(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary_elementwise(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// `m + v` with `v` broadcast over the rows of `m`.
    pub fn add_rows(&mut self, m: NodeId, v: NodeId) -> NodeId {
        let (tm, tv) = (self.value(m), self.value(v));
        assert_eq!(tm.rank(), 2, "add_rows wants a matrix, got {:?}", tm.shape());
        assert_eq!(
            tm.cols(),
            tv.numel(),
            "add_rows shape mismatch: {:?} vs {:?}",
            tm.shape(),
            tv.shape()
        );
        let n = tm.cols();
        let mut data = tm.data().to_vec();
        for row in data.chunks_exact_mut(n) {
            add_slices(row, tv.data());
        }
        let t = Tensor::matrix(tm.rows(), n, data);
        self.push(t, Op::AddRows(m, v))
    }

    fn unary(&mut self, x: NodeId, f: impl Fn(f64) -> f64, op: Op) -> NodeId {
        let tx = self.value(x);
        let t = Tensor::new(tx.shape().to_vec(), tx.data().iter().map(|&v| f(v)).collect());
        self.push(t, op)
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        self.unary(x, f64::tanh, Op::Tanh(x))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        self.unary(x, |v| 1.0 / (1.0 + (-v).exp()), Op::Sigmoid(x))
    }

    /// Elementwise `a*x + b` with constants.
    pub fn scale_shift(&mut self, x: NodeId, a: f64, b: f64) -> NodeId {
        self.unary(x, |v| a * v + b, Op::ScaleShift { x, a })
    }

    /// `1 - x` elementwise.
    pub fn one_minus(&mut self, x: NodeId) -> NodeId {
        self.scale_shift(x, -1.0, 1.0)
    }

    /// Inverted dropout: at training time each element is zeroed with
    /// probability `rate` and survivors are scaled by `1/(1-rate)`; at
    /// inference the input node is returned unchanged.
    pub fn dropout(&mut self, x: NodeId, rate: f64, training: bool) -> NodeId {
        assert!((0.0..1.0).contains(&rate), "dropout rate {rate} outside [0, 1)");
        if !training || rate == 0.0 {
            return x;
        }
        self.dropout_active = true;
        let n = self.value(x).numel();
        let scale = 1.0 / (1.0 - rate);
        let mask: Vec<f64> =
            (0..n).map(|_| if self.rng.chance(rate) { 0.0 } else { scale }).collect();
        let tx = self.value(x);
        let data = tx.data().iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        let t = Tensor::new(tx.shape().to_vec(), data);
        self.push(t, Op::Dropout { x, mask })
    }

    /// Numerically stable softmax over a vector (max subtraction).
    pub fn softmax(&mut self, x: NodeId) -> NodeId {
        let tx = self.value(x);
        assert_eq!(tx.rank(), 1, "softmax wants a vector, got {:?}", tx.shape());
        assert!(!tx.data().is_empty(), "softmax on empty vector");
        // Non-finite logits are allowed through as NaN so that numerical
        // breakdown surfaces at the loss, where callers check for it.
        let max = tx.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = tx.data().iter().map(|&v| (v - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let t = Tensor::vector(exps.iter().map(|e| e / z).collect());
        self.push(t, Op::Softmax(x))
    }

    pub fn concat(&mut self, parts: &[NodeId], axis: usize) -> NodeId {
        assert!(!parts.is_empty(), "concat of zero tensors");
        let rank = self.value(parts[0]).rank();
        assert!(
            parts.iter().all(|&p| self.value(p).rank() == rank),
            "concat of mixed ranks"
        );
        let t = match (rank, axis) {
            (1, 0) => {
                let mut data = Vec::new();
                for &p in parts {
                    data.extend_from_slice(self.value(p).data());
                }
                Tensor::vector(data)
            }
            (2, 0) => {
                let cols = self.value(parts[0]).cols();
                let mut rows = 0;
                let mut data = Vec::new();
                for &p in parts {
                    let tp = self.value(p);
                    assert_eq!(tp.cols(), cols, "concat axis 0: column mismatch");
                    rows += tp.rows();
                    data.extend_from_slice(tp.data());
                }
                Tensor::matrix(rows, cols, data)
            }
            (2, 1) => {
                let rows = self.value(parts[0]).rows();
                assert!(
                    parts.iter().all(|&p| self.value(p).rows() == rows),
                    "concat axis 1: row mismatch"
                );
                let total: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
                let mut data = Vec::with_capacity(rows * total);
                for r in 0..rows {
                    for &p in parts {
                        let tp = self.value(p);
                        let c = tp.cols();
                        data.extend_from_slice(&tp.data()[r * c..(r + 1) * c]);
                    }
                }
                Tensor::matrix(rows, total, data)
            }
            _ => panic!("concat: unsupported rank {rank} / axis {axis}"),
        };
        self.push(t, Op::Concat { parts: parts.to_vec(), axis })
    }

    /// Stack equal-length vectors into a matrix, one vector per row.
    pub fn stack_rows(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "stack_rows of zero vectors");
        let n = self.value(parts[0]).numel();
        let mut data = Vec::with_capacity(parts.len() * n);
        for &p in parts {
            let tp = self.value(p);
            assert_eq!(tp.rank(), 1, "stack_rows wants vectors, got {:?}", tp.shape());
            assert_eq!(tp.numel(), n, "stack_rows length mismatch");
            data.extend_from_slice(tp.data());
        }
        let t = Tensor::matrix(parts.len(), n, data);
        self.push(t, Op::Stack { parts: parts.to_vec() })
    }

    /// Row `idx` of a matrix as a vector (embedding lookup).
    pub fn row(&mut self, m: NodeId, idx: usize) -> NodeId {
        let tm = self.value(m);
        assert_eq!(tm.rank(), 2, "row() wants a matrix, got {:?}", tm.shape());
        assert!(idx < tm.rows(), "row {} out of range for {:?}", idx, tm.shape());
        let n = tm.cols();
        let t = Tensor::vector(tm.data()[idx * n..(idx + 1) * n].to_vec());
        self.push(t, Op::Row { m, idx })
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let s: f64 = self.value(x).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(x))
    }

    /// `-ln(dist[target] + eps)`; `dist` must be a probability vector.
    pub fn nll_loss(&mut self, dist: NodeId, target: usize) -> NodeId {
        let td = self.value(dist);
        assert_eq!(td.rank(), 1, "nll_loss wants a vector, got {:?}", td.shape());
        assert!(
            target < td.numel(),
            "nll_loss target {} out of range for {:?}",
            target,
            td.shape()
        );
        let sum: f64 = td.data().iter().sum();
        debug_assert!(
            !sum.is_finite() || (sum - 1.0).abs() < 1e-6,
            "nll_loss input sums to {sum}, not 1"
        );
        let v = -(td.data()[target] + NLL_EPS).ln();
        self.push(Tensor::scalar(v), Op::Nll { dist, target })
    }

    /// Scatter-add `src[i]` into position `ids[i]` of a fresh `width`-sized
    /// vector.  Repeated ids accumulate.
    pub fn scatter_add(&mut self, src: NodeId, ids: Rc<Vec<usize>>, width: usize) -> NodeId {
        let ts = self.value(src);
        assert_eq!(ts.rank(), 1, "scatter_add wants a vector, got {:?}", ts.shape());
        assert_eq!(ts.numel(), ids.len(), "scatter_add: {} values for {} ids", ts.numel(), ids.len());
        let mut out = vec![0.0; width];
        for (&v, &id) in ts.data().iter().zip(ids.iter()) {
            assert!(id < width, "scatter_add id {id} out of range {width}");
            out[id] += v;
        }
        self.push(Tensor::vector(out), Op::Scatter { src, ids })
    }

    /// Multiply all of `x` by the scalar node `s` (shape `[1]`).
    pub fn mul_scalar(&mut self, s: NodeId, x: NodeId) -> NodeId {
        assert!(self.value(s).is_scalar(), "mul_scalar: s has shape {:?}", self.value(s).shape());
        let sv = self.value(s).item();
        let tx = self.value(x);
        let t = Tensor::new(tx.shape().to_vec(), tx.data().iter().map(|&v| sv * v).collect());
        self.push(t, Op::MulScalar { s, x })
    }

    // ── gradients ────────────────────────────────────────────────────────

    pub fn zero_grads(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    /// Reverse-mode sweep from a scalar loss.  Gradients of this pass are
    /// *added* onto any gradients already stored, so repeated calls
    /// accumulate; call [`Graph::zero_grads`] in between to reset.
    pub fn backward(&mut self, loss: NodeId) {
        assert!(
            self.value(loss).is_scalar(),
            "backward from non-scalar loss of shape {:?}",
            self.value(loss).shape()
        );
        let n = self.nodes.len();
        // Per-pass gradients, kept separate from the persistent accumulators
        // so that a second backward call contributes exactly one more pass.
        let mut pass: Vec<Option<Vec<f64>>> = (0..n).map(|_| None).collect();
        pass[loss.0] = Some(vec![1.0]);

        for i in (0..n).rev() {
            let Some(g) = pass[i].take() else { continue };
            // Commit this node's pass gradient to its accumulator.
            match &mut self.nodes[i].grad {
                Some(acc) => add_slices(acc, &g),
                slot => *slot = Some(g.clone()),
            }
            let op = self.nodes[i].op.clone();
            self.propagate(i, &op, &g, &mut pass);
        }
    }

    fn acc<'a>(&self, pass: &'a mut [Option<Vec<f64>>], id: NodeId) -> &'a mut Vec<f64> {
        let len = self.nodes[id.0].value.numel();
        pass[id.0].get_or_insert_with(|| vec![0.0; len])
    }

    fn propagate(&self, out: usize, op: &Op, g: &[f64], pass: &mut [Option<Vec<f64>>]) {
        match op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                match (ta.rank(), tb.rank()) {
                    (2, 2) => {
                        let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
                        {
                            let da = self.acc(pass, *a);
                            for i in 0..m {
                                let grow = &g[i * n..(i + 1) * n];
                                for p in 0..k {
                                    da[i * k + p] += dot(grow, &tb.data()[p * n..(p + 1) * n]);
                                }
                            }
                        }
                        let db = self.acc(pass, *b);
                        for i in 0..m {
                            let grow = &g[i * n..(i + 1) * n];
                            let arow = &ta.data()[i * k..(i + 1) * k];
                            for (p, &av) in arow.iter().enumerate() {
                                axpy(&mut db[p * n..(p + 1) * n], av, grow);
                            }
                        }
                    }
                    (1, 2) => {
                        let (k, n) = (ta.numel(), tb.cols());
                        {
                            let da = self.acc(pass, *a);
                            for p in 0..k {
                                da[p] += dot(g, &tb.data()[p * n..(p + 1) * n]);
                            }
                        }
                        let db = self.acc(pass, *b);
                        for (p, &av) in ta.data().iter().enumerate() {
                            axpy(&mut db[p * n..(p + 1) * n], av, g);
                        }
                    }
                    (2, 1) => {
                        let (m, k) = (ta.rows(), ta.cols());
                        {
                            let da = self.acc(pass, *a);
                            for i in 0..m {
                                axpy(&mut da[i * k..(i + 1) * k], g[i], tb.data());
                            }
                        }
                        let db = self.acc(pass, *b);
                        for i in 0..m {
                            axpy(db, g[i], &ta.data()[i * k..(i + 1) * k]);
                        }
                    }
                    _ => unreachable!(),
                }
            }
            Op::Add(a, b) => {
                add_slices(self.acc(pass, *a), g);
                add_slices(self.acc(pass, *b), g);
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                {
                    let da = self.acc(pass, *a);
                    for ((d, &gv), &bv) in da.iter_mut().zip(g).zip(tb.data()) {
                        *d += gv * bv;
                    }
                }
                let db = self.acc(pass, *b);
                for ((d, &gv), &av) in db.iter_mut().zip(g).zip(ta.data()) {
                    *d += gv * av;
                }
            }
            Op::AddRows(m, v) => {
                add_slices(self.acc(pass, *m), g);
                let n = self.nodes[v.0].value.numel();
                let dv = self.acc(pass, *v);
                for row in g.chunks_exact(n) {
                    add_slices(dv, row);
                }
            }
            Op::Tanh(x) => {
                let y = &self.nodes[out].value;
                let dx = self.acc(pass, *x);
                for ((d, &gv), &yv) in dx.iter_mut().zip(g).zip(y.data()) {
                    *d += gv * (1.0 - yv * yv);
                }
            }
            Op::Sigmoid(x) => {
                let y = &self.nodes[out].value;
                let dx = self.acc(pass, *x);
                for ((d, &gv), &yv) in dx.iter_mut().zip(g).zip(y.data()) {
                    *d += gv * yv * (1.0 - yv);
                }
            }
            Op::ScaleShift { x, a } => {
                axpy(self.acc(pass, *x), *a, g);
            }
            Op::Dropout { x, mask } => {
                let dx = self.acc(pass, *x);
                for ((d, &gv), &mv) in dx.iter_mut().zip(g).zip(mask) {
                    *d += gv * mv;
                }
            }
            Op::Softmax(x) => {
                let y = &self.nodes[out].value;
                let gy = dot(g, y.data());
                let dx = self.acc(pass, *x);
                for ((d, &gv), &yv) in dx.iter_mut().zip(g).zip(y.data()) {
                    *d += yv * (gv - gy);
                }
            }
            Op::Concat { parts, axis } => {
                let rank = self.nodes[parts[0].0].value.rank();
                match (rank, axis) {
                    (1, 0) | (2, 0) => {
                        let mut off = 0;
                        for &p in parts {
                            let n = self.nodes[p.0].value.numel();
                            add_slices(self.acc(pass, p), &g[off..off + n]);
                            off += n;
                        }
                    }
                    (2, 1) => {
                        let rows = self.nodes[parts[0].0].value.rows();
                        let total: usize =
                            parts.iter().map(|&p| self.nodes[p.0].value.cols()).sum();
                        let mut off = 0;
                        for &p in parts {
                            let c = self.nodes[p.0].value.cols();
                            let dp = self.acc(pass, p);
                            for r in 0..rows {
                                add_slices(
                                    &mut dp[r * c..(r + 1) * c],
                                    &g[r * total + off..r * total + off + c],
                                );
                            }
                            off += c;
                        }
                    }
                    _ => unreachable!(),
                }
            }
            Op::Stack { parts } => {
                let n = self.nodes[parts[0].0].value.numel();
                for (r, &p) in parts.iter().enumerate() {
                    add_slices(self.acc(pass, p), &g[r * n..(r + 1) * n]);
                }
            }
            Op::Row { m, idx } => {
                let n = self.nodes[m.0].value.cols();
                let dm = self.acc(pass, *m);
                add_slices(&mut dm[idx * n..(idx + 1) * n], g);
            }
            Op::Sum(x) => {
                let dx = self.acc(pass, *x);
                for d in dx.iter_mut() {
                    *d += g[0];
                }
            }
            Op::Nll { dist, target } => {
                let p = self.nodes[dist.0].value.data()[*target];
                self.acc(pass, *dist)[*target] += -g[0] / (p + NLL_EPS);
            }
            Op::Scatter { src, ids } => {
                let ds = self.acc(pass, *src);
                for (d, &id) in ds.iter_mut().zip(ids.iter()) {
                    *d += g[id];
                }
            }
            Op::MulScalar { s, x } => {
                let (ts, tx) = (&self.nodes[s.0].value, &self.nodes[x.0].value);
                self.acc(pass, *s)[0] += dot(g, tx.data());
                axpy(self.acc(pass, *x), ts.item(), g);
            }
        }
    }

}
