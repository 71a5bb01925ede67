//! Context and entity encoders.

use std::rc::Rc;

use crate::autograd::{Graph, NodeId};

use super::params::{gru_cell, Bound};

/// Everything the decoder needs about an encoded context.  Attention keys
/// are precomputed once per context because they do not depend on the
/// decoder state.
pub struct Encoded {
    /// Per-token bidirectional states, each `[2·d_hid]`.
    pub hs: Vec<NodeId>,
    /// The same states stacked into `[n, 2·d_hid]`.
    pub h_mat: NodeId,
    /// `h_mat · W_keys + b`, shape `[n, d_hid]`.
    pub att_keys: NodeId,
    /// Vocabulary id of each source token, shared with the pointer head.
    pub src_ids: Rc<Vec<usize>>,
    /// Concatenated final states of both directions, `[2·d_hid]`.
    pub summary: NodeId,
}

/// Run the bidirectional GRU over the source token ids.
pub fn encode_context(g: &mut Graph, b: &Bound, src_ids: &Rc<Vec<usize>>) -> Encoded {
    assert!(!src_ids.is_empty(), "cannot encode an empty context");
    let emb = b.get("emb");
    let h = b.hyper.d_hid;

    let fwd_gru = b.gru("enc_fwd");
    let mut state = g.zeros(h);
    let mut fwd = Vec::with_capacity(src_ids.len());
    for &id in src_ids.iter() {
        let x = g.row(emb, id);
        state = gru_cell(g, &fwd_gru, x, state);
        fwd.push(state);
    }

    let bwd_gru = b.gru("enc_bwd");
    let mut state = g.zeros(h);
    let mut bwd = Vec::with_capacity(src_ids.len());
    for &id in src_ids.iter().rev() {
        let x = g.row(emb, id);
        state = gru_cell(g, &bwd_gru, x, state);
        bwd.push(state);
    }
    bwd.reverse();

    let hs: Vec<NodeId> =
        fwd.iter().zip(&bwd).map(|(&f, &bk)| g.concat(&[f, bk], 0)).collect();
    let h_mat = g.stack_rows(&hs);
    let keys = g.matmul(h_mat, b.get("att.w_keys"));
    let att_b = b.get("att.b");
    let att_keys = g.add_rows(keys, att_b);
    let summary = g.concat(&[*fwd.last().unwrap(), bwd[0]], 0);

    Encoded { hs, h_mat, att_keys, src_ids: Rc::clone(src_ids), summary }
}

/// Pool the encoder states under an entity mention (inclusive token
/// bounds) with the entity GRU.  `None` means "no entity conditioning"
/// and yields a zero vector, which also keeps the entity GRU out of the
/// gradient entirely.
pub fn encode_entity(g: &mut Graph, b: &Bound, enc: &Encoded, span: Option<(usize, usize)>) -> NodeId {
    match span {
        None => g.zeros(b.hyper.d_hid),
        Some((start, end)) => {
            assert!(start <= end && end < enc.hs.len(), "span ({start}, {end}) outside context");
            let gru = b.gru("ent");
            let mut state = g.zeros(b.hyper.d_hid);
            for &hi in &enc.hs[start..=end] {
                state = gru_cell(g, &gru, hi, state);
            }
            state
        }
    }
}
