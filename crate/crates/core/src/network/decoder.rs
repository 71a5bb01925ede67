//! Attention decoder with a pointer-softmax output layer.

use crate::autograd::{Graph, NodeId};

use super::encoder::Encoded;
use super::params::{gru_cell, Bound};

/// Everything one decoder step produces.
pub struct StepOut {
    /// Mixture distribution over the vocabulary, `[V]`.
    pub p: NodeId,
    /// Attention weights over the source tokens, `[n]`.
    pub alpha: NodeId,
    /// Shortlist gate in (0, 1), `[1]`.
    pub switch: NodeId,
    /// Recurrent state to carry into the next step, `[d_hid]`.
    pub state: NodeId,
}

fn linear(g: &mut Graph, x: NodeId, w: NodeId, b: NodeId) -> NodeId {
    let xw = g.matmul(x, w);
    g.add(xw, b)
}

/// Initial decoder state from the context summary and entity vector.
pub fn project_init(g: &mut Graph, b: &Bound, enc: &Encoded, entity: NodeId) -> NodeId {
    let joined = g.concat(&[enc.summary, entity], 0);
    let pre = linear(g, joined, b.get("init_proj.w"), b.get("init_proj.b"));
    g.tanh(pre)
}

/// Initial session state for hierarchical decoding.
pub fn project_q1(g: &mut Graph, b: &Bound, enc: &Encoded, entity: NodeId) -> NodeId {
    let joined = g.concat(&[enc.summary, entity], 0);
    let pre = linear(g, joined, b.get("q1_proj.w"), b.get("q1_proj.b"));
    g.tanh(pre)
}

/// Advance the session state after one finished subsequence whose final
/// decoder state was `d_last`.
pub fn session_step(g: &mut Graph, b: &Bound, q: NodeId, d_last: NodeId) -> NodeId {
    let sess = b.gru("sess");
    gru_cell(g, &sess, d_last, q)
}

/// One decoder step: consume the previous output token, attend over the
/// context, and emit the next-token distribution
/// `p = s · p_shortlist + (1 − s) · p_pointer`, where the pointer
/// distribution is the attention weights added back onto the source
/// tokens' vocabulary ids.
pub fn decoder_step(
    g: &mut Graph,
    b: &Bound,
    enc: &Encoded,
    state: NodeId,
    y_prev: usize,
    training: bool,
) -> StepOut {
    let emb = b.get("emb");
    let x = g.row(emb, y_prev);
    let dec1 = b.gru("dec1");
    let h1 = gru_cell(g, &dec1, x, state);

    let query = g.matmul(h1, b.get("att.w_query"));
    let pre = g.add_rows(enc.att_keys, query);
    let act = g.tanh(pre);
    let scores = g.matmul(act, b.get("att.v"));
    let alpha = g.softmax(scores);
    let context = g.matmul(alpha, enc.h_mat);

    let dec2 = b.gru("dec2");
    let h2 = gru_cell(g, &dec2, context, h1);
    let dropped = g.dropout(h2, b.hyper.dropout, training);
    let features = g.concat(&[dropped, context], 0);

    let hidden_pre = linear(g, features, b.get("shortlist.w1"), b.get("shortlist.b1"));
    let hidden = g.tanh(hidden_pre);
    let logits = linear(g, hidden, b.get("shortlist.w2"), b.get("shortlist.b2"));
    let p_short = g.softmax(logits);

    let gate_pre = linear(g, features, b.get("switch.w1"), b.get("switch.b1"));
    let gate_hidden = g.tanh(gate_pre);
    let gate_logit = linear(g, gate_hidden, b.get("switch.w2"), b.get("switch.b2"));
    let switch = g.sigmoid(gate_logit);

    let vocab = b.vocab_size(g);
    let p_copy = g.scatter_add(alpha, enc.src_ids.clone(), vocab);

    let from_short = g.mul_scalar(switch, p_short);
    let anti = g.one_minus(switch);
    let from_copy = g.mul_scalar(anti, p_copy);
    let p = g.add(from_short, from_copy);

    StepOut { p, alpha, switch, state: h2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autograd::Params;
    use crate::network::encoder::{encode_context, encode_entity};
    use crate::network::params::{init_params, HyperParams};
    use crate::rng::Rng;
    use std::rc::Rc;

    fn tiny() -> (HyperParams, Params) {
        let hyper = HyperParams { d_emb: 3, d_hid: 4, dropout: 0.0, emb_scale: 0.1 };
        (hyper, init_params(&hyper, 9, 7))
    }

    fn sums_to_one(xs: &[f64]) -> bool {
        (xs.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && xs.iter().all(|&v| v >= 0.0)
    }

    #[test]
    fn outputs_are_distributions() {
        let (hyper, params) = tiny();
        let mut rng = Rng::new(3);
        for trial in 0..50 {
            let mut g = Graph::new(trial);
            let b = Bound::new(&mut g, &params, hyper);
            let n = rng.range(1, 7);
            let src = Rc::new((0..n).map(|_| rng.below(9)).collect::<Vec<_>>());
            let enc = encode_context(&mut g, &b, &src);
            let ent = encode_entity(&mut g, &b, &enc, None);
            let mut state = project_init(&mut g, &b, &enc, ent);
            let mut prev = 2;
            for _ in 0..3 {
                let out = decoder_step(&mut g, &b, &enc, state, prev, false);
                assert_eq!(g.value(out.p).numel(), 9);
                assert_eq!(g.value(out.alpha).numel(), n);
                assert!(sums_to_one(g.value(out.p).data()));
                assert!(sums_to_one(g.value(out.alpha).data()));
                let s = g.value(out.switch).item();
                assert!(s > 0.0 && s < 1.0, "switch {s} left (0, 1)");
                state = out.state;
                prev = g
                    .value(out.p)
                    .data()
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap()
                    .0;
            }
        }
    }

    #[test]
    fn saturated_switch_reduces_to_pure_shortlist() {
        let (hyper, mut params) = tiny();
        params.get_mut("switch.b2").data_mut()[0] = 1e3;
        let mut g = Graph::new(0);
        let b = Bound::new(&mut g, &params, hyper);
        let src = Rc::new(vec![1usize, 5, 5]);
        let enc = encode_context(&mut g, &b, &src);
        let ent = encode_entity(&mut g, &b, &enc, None);
        let state = project_init(&mut g, &b, &enc, ent);
        let out = decoder_step(&mut g, &b, &enc, state, 2, false);
        assert_eq!(g.value(out.switch).item(), 1.0);
        // With the gate pinned at exactly 1.0 the pointer contributes 0,
        // so p is itself a softmax output: strictly positive everywhere.
        assert!(g.value(out.p).data().iter().all(|&v| v > 0.0));
        assert!(sums_to_one(g.value(out.p).data()));
    }

    #[test]
    fn suppressed_switch_reduces_to_pointer_over_source_ids() {
        let (hyper, mut params) = tiny();
        params.get_mut("switch.b2").data_mut()[0] = -1e3;
        let mut g = Graph::new(0);
        let b = Bound::new(&mut g, &params, hyper);
        let src = Rc::new(vec![1usize, 5, 5]);
        let enc = encode_context(&mut g, &b, &src);
        let ent = encode_entity(&mut g, &b, &enc, None);
        let state = project_init(&mut g, &b, &enc, ent);
        let out = decoder_step(&mut g, &b, &enc, state, 2, false);
        assert_eq!(g.value(out.switch).item(), 0.0);
        let p = g.value(out.p).data().to_vec();
        let alpha = g.value(out.alpha).data().to_vec();
        // Mass lands only on ids 1 and 5, and 5 pools both mentions.
        assert!((p[1] - alpha[0]).abs() < 1e-15);
        assert!((p[5] - (alpha[1] + alpha[2])).abs() < 1e-15);
        for (id, &v) in p.iter().enumerate() {
            if id != 1 && id != 5 {
                assert_eq!(v, 0.0, "vocab id {id} is not in the source");
            }
        }
    }

    #[test]
    fn session_state_advances_distinctly() {
        let (hyper, params) = tiny();
        let mut g = Graph::new(0);
        let b = Bound::new(&mut g, &params, hyper);
        let src = Rc::new(vec![1usize, 2, 3, 4]);
        let enc = encode_context(&mut g, &b, &src);
        let ent = encode_entity(&mut g, &b, &enc, Some((0, 1)));
        let q1 = project_q1(&mut g, &b, &enc, ent);
        let out = decoder_step(&mut g, &b, &enc, q1, 2, false);
        let q2 = session_step(&mut g, &b, q1, out.state);
        assert_eq!(g.value(q2).shape(), &[4]);
        assert_ne!(g.value(q2).data(), g.value(q1).data());
    }

    #[test]
    fn teacher_forced_loss_gradients_match_finite_differences() {
        // End-to-end through encoder, entity conditioning, both decoder
        // stages, attention, and the mixture head.
        let hyper = HyperParams { d_emb: 3, d_hid: 4, dropout: 0.0, emb_scale: 0.1 };
        let params = init_params(&hyper, 9, 11);
        // The loss is O(10); at a 1e-5 step the central difference keeps
        // ~2e-10 of cancellation noise, which would drown the smallest
        // real gradients.  1e-4 puts noise three digits below them while
        // truncation stays near 1e-5 relative.
        let worst = crate::autograd::grad_check(&params, 1e-4, |p, g| {
            let b = Bound::new(g, p, hyper);
            let src = Rc::new(vec![1usize, 4, 7, 2, 5]);
            let enc = encode_context(g, &b, &src);
            let ent = encode_entity(g, &b, &enc, Some((1, 3)));
            let mut state = project_init(g, &b, &enc, ent);
            let mut prev = 2;
            let mut losses = Vec::new();
            for &target in &[4usize, 7, 3] {
                let out = decoder_step(g, &b, &enc, state, prev, false);
                losses.push(g.nll_loss(out.p, target));
                state = out.state;
                prev = target;
            }
            let stacked = g.concat(&losses, 0);
            g.sum(stacked)
        });
        assert!(worst <= 1e-4, "worst relative gradient error {worst}");
    }

    #[test]
    fn hierarchical_loss_gradients_match_finite_differences() {
        // Same as above but through the session cell and q1 projection.
        let hyper = HyperParams { d_emb: 3, d_hid: 4, dropout: 0.0, emb_scale: 0.1 };
        let params = init_params(&hyper, 9, 13);
        let worst = crate::autograd::grad_check(&params, 1e-4, |p, g| {
            let b = Bound::new(g, p, hyper);
            let src = Rc::new(vec![3usize, 8, 1, 6]);
            let enc = encode_context(g, &b, &src);
            let ent = encode_entity(g, &b, &enc, None);
            let mut q = project_q1(g, &b, &enc, ent);
            let mut losses = Vec::new();
            for seq in [[4usize, 3].as_slice(), [8, 3].as_slice(), [5].as_slice()] {
                let mut state = q;
                let mut prev = 2;
                for &target in seq {
                    let out = decoder_step(g, &b, &enc, state, prev, false);
                    losses.push(g.nll_loss(out.p, target));
                    state = out.state;
                    prev = target;
                }
                q = session_step(g, &b, q, state);
            }
            let stacked = g.concat(&losses, 0);
            g.sum(stacked)
        });
        assert!(worst <= 1e-4, "worst relative gradient error {worst}");
    }

    #[test]
    fn dropout_masks_apply_only_in_training() {
        let (mut hyper, params) = tiny();
        hyper.dropout = 0.5;
        let mut g = Graph::new(99);
        let b = Bound::new(&mut g, &params, hyper);
        let src = Rc::new(vec![1usize, 2]);
        let enc = encode_context(&mut g, &b, &src);
        let ent = encode_entity(&mut g, &b, &enc, None);
        let state = project_init(&mut g, &b, &enc, ent);
        assert!(!g.dropout_was_active());
        let out = decoder_step(&mut g, &b, &enc, state, 2, true);
        assert!(g.dropout_was_active());
        // Even with dropout the output stays a distribution.
        assert!(sums_to_one(g.value(out.p).data()));
    }
}
