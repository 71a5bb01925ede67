//! Turning a trained network into predicted command sets.

use std::rc::Rc;

use crate::autograd::{Graph, NodeId, Params};
use crate::models::Arch;
use crate::network::{
    decoder_step, encode_context, encode_entity, project_init, project_q1, session_step, Bound,
    Encoded, HyperParams,
};
use crate::runtime::beam::{beam_search, greedy, StepDecoder};
use crate::textcorpus::{DataPoint, Task, Vocab, BOS, EOCS, EOS, SEP};

#[derive(Clone, Copy, Debug)]
pub struct PredictConfig {
    /// Candidates tracked by the flat beam-search decoder.
    pub beam_width: usize,
    /// Finished beams kept as the predicted set (must not exceed
    /// `beam_width`).  The set size is fixed by this cap, not by any
    /// estimate of how many commands the state really admits.
    pub top_k: usize,
    /// Token budget per command, terminator included.
    pub cmd_len_cap: usize,
    /// Command budget per hierarchical session; also bounds how many
    /// separator-joined fragments a concatenated decode may produce.
    pub session_cap: usize,
    /// Rank beams by per-token rather than total log-probability.
    pub length_normalize: bool,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            beam_width: 10,
            top_k: 10,
            cmd_len_cap: 10,
            session_cap: 30,
            length_normalize: false,
        }
    }
}

impl PredictConfig {
    /// Decoding budgets sized to each task: whole-state command sets are
    /// larger and need a wider net than per-entity sets.
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Acg => PredictConfig { beam_width: 30, top_k: 11, ..PredictConfig::default() },
            Task::Acge => PredictConfig { beam_width: 10, top_k: 3, ..PredictConfig::default() },
        }
    }
}

/// A predicted command set for one data point.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub commands: Vec<String>,
    /// Some decode hit a budget cap before emitting its terminator, so
    /// the set may be incomplete.
    pub truncated: bool,
}

/// Adapts the network to the step-decoder interface by growing a graph
/// forward-only (no gradients are ever requested from it).
pub struct NetDecoder<'g, 'b> {
    pub g: &'g mut Graph,
    pub bound: &'b Bound,
    pub enc: &'b Encoded,
}

impl StepDecoder for NetDecoder<'_, '_> {
    type State = NodeId;
    fn step(&mut self, state: &NodeId, prev: usize) -> (Vec<f64>, NodeId) {
        let out = decoder_step(self.g, self.bound, self.enc, *state, prev, false);
        (self.g.value(out.p).data().to_vec(), out.state)
    }
}

fn detok(vocab: &Vocab, tokens: &[usize]) -> String {
    tokens.iter().map(|&t| vocab.decode(t)).collect::<Vec<_>>().join(" ")
}

fn push_unique(out: &mut Vec<String>, s: String) {
    if !s.is_empty() && !out.contains(&s) {
        out.push(s);
    }
}

/// Split a concatenated decode into command fragments.  An unfinished
/// decode ran out of budget mid-sequence, so its trailing fragment is
/// dropped as likely incomplete.
fn split_concat(tokens: &[usize], finished: bool) -> Vec<&[usize]> {
    let mut fragments: Vec<&[usize]> = tokens.split(|&t| t == SEP).collect();
    if !finished {
        fragments.pop();
    }
    fragments
}

pub fn predict_point(
    params: &Params,
    hyper: HyperParams,
    vocab: &Vocab,
    arch: Arch,
    point: &DataPoint,
    cfg: &PredictConfig,
) -> Prediction {
    assert!(cfg.top_k <= cfg.beam_width, "cannot keep more beams than are tracked");
    let src = Rc::new(vocab.encode_all(&point.context));
    let span = match point.task {
        Task::Acge => {
            let e = &point.entities[0];
            Some((e.start, e.end))
        }
        Task::Acg => None,
    };
    let mut g = Graph::new(0);
    let bound = Bound::new(&mut g, params, hyper);
    let enc = encode_context(&mut g, &bound, &src);
    let entity = encode_entity(&mut g, &bound, &enc, span);
    let mut out = Vec::new();
    let mut truncated = false;
    match arch {
        Arch::PsBs => {
            let init = project_init(&mut g, &bound, &enc, entity);
            let mut dec = NetDecoder { g: &mut g, bound: &bound, enc: &enc };
            let hyps = beam_search(
                &mut dec,
                init,
                BOS,
                cfg.beam_width,
                cfg.cmd_len_cap,
                &[EOS],
                cfg.length_normalize,
            );
            for h in &hyps {
                if out.len() == cfg.top_k {
                    break;
                }
                if h.finished {
                    push_unique(&mut out, detok(vocab, &h.tokens[..h.tokens.len() - 1]));
                } else {
                    truncated = true;
                }
            }
        }
        Arch::HredPs => {
            let mut q = project_q1(&mut g, &bound, &enc, entity);
            let mut ended = false;
            for _ in 0..cfg.session_cap {
                let (hyp, last) = {
                    let mut dec = NetDecoder { g: &mut g, bound: &bound, enc: &enc };
                    greedy(&mut dec, q, BOS, cfg.cmd_len_cap, &[EOS, EOCS])
                };
                let end_of_set = hyp.tokens.last() == Some(&EOCS);
                if hyp.finished && !end_of_set {
                    push_unique(&mut out, detok(vocab, &hyp.tokens[..hyp.tokens.len() - 1]));
                } else if !hyp.finished {
                    truncated = true;
                }
                if end_of_set {
                    ended = true;
                    break;
                }
                q = session_step(&mut g, &bound, q, last);
            }
            truncated |= !ended;
        }
        Arch::PsCat => {
            let init = project_init(&mut g, &bound, &enc, entity);
            let budget = cfg.cmd_len_cap * cfg.session_cap;
            let (hyp, _) = {
                let mut dec = NetDecoder { g: &mut g, bound: &bound, enc: &enc };
                greedy(&mut dec, init, BOS, budget, &[EOS])
            };
            truncated = !hyp.finished;
            let body =
                if hyp.finished { &hyp.tokens[..hyp.tokens.len() - 1] } else { &hyp.tokens[..] };
            for frag in split_concat(body, hyp.finished) {
                push_unique(&mut out, detok(vocab, frag));
            }
        }
    }
    Prediction { commands: out, truncated }
}

/// Predictions aligned with `points`.
pub fn predict_dataset(
    params: &Params,
    hyper: HyperParams,
    vocab: &Vocab,
    arch: Arch,
    points: &[DataPoint],
    cfg: &PredictConfig,
) -> Vec<Prediction> {
    points.iter().map(|p| predict_point(params, hyper, vocab, arch, p, cfg)).collect()
}
