//! The three command-set generators.
//!
//! All three share the encoder and the pointer-softmax decoder; they
//! differ only in how a *set* of commands becomes decoder target
//! sequences:
//!
//! * [`Arch::PsBs`] — each command is its own sequence; at decode time a
//!   beam search proposes candidates and the top ones form the set.
//! * [`Arch::HredPs`] — the sorted commands are decoded one after
//!   another, a session-level GRU carrying state between them, with a
//!   lone end-of-set token as the final subsequence.
//! * [`Arch::PsCat`] — the sorted commands are concatenated into one
//!   target sequence with separator tokens, so the whole set is a single
//!   decode.
//!
//! Commands are always sorted (and de-duplicated) before linearization,
//! which makes the target a pure function of the command *set*.

use std::rc::Rc;

use crate::autograd::{Graph, NodeId};
use crate::network::{
    decoder_step, encode_context, encode_entity, project_init, project_q1, session_step, Bound,
};
use crate::textcorpus::{DataPoint, Task, Vocab, BOS, EOCS, EOS, SEP, UNK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arch {
    PsBs,
    HredPs,
    PsCat,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::PsBs, Arch::HredPs, Arch::PsCat];

    pub fn as_str(self) -> &'static str {
        match self {
            Arch::PsBs => "ps_bs",
            Arch::HredPs => "hred_ps",
            Arch::PsCat => "ps_cat",
        }
    }

    pub fn parse(s: &str) -> Option<Arch> {
        Arch::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl std::fmt::Display for Arch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One training example: encoded context, optional entity mention bounds,
/// and the target sequences the decoder must produce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub src: Rc<Vec<usize>>,
    pub entity_span: Option<(usize, usize)>,
    pub seqs: Vec<Vec<usize>>,
}

impl Instance {
    /// Total number of supervised target tokens.
    pub fn target_tokens(&self) -> usize {
        self.seqs.iter().map(Vec::len).sum()
    }

    /// How many target tokens fell out of the vocabulary.
    pub fn unk_targets(&self) -> usize {
        self.seqs.iter().flatten().filter(|&&t| t == UNK).count()
    }
}

/// Sort, de-duplicate, and tokenize a command set into decoder target
/// sequences for `arch`.
pub fn linearize_targets(arch: Arch, commands: &[String], vocab: &Vocab) -> Vec<Vec<usize>> {
    let mut sorted: Vec<&String> = commands.iter().collect();
    sorted.sort();
    sorted.dedup();
    let encode = |c: &str| -> Vec<usize> { c.split(' ').map(|w| vocab.encode(w)).collect() };
    match arch {
        Arch::PsBs => {
            if sorted.is_empty() {
                return vec![vec![EOS]];
            }
            sorted
                .iter()
                .map(|c| {
                    let mut seq = encode(c);
                    seq.push(EOS);
                    seq
                })
                .collect()
        }
        Arch::HredPs => {
            let mut seqs: Vec<Vec<usize>> = sorted
                .iter()
                .map(|c| {
                    let mut seq = encode(c);
                    seq.push(EOS);
                    seq
                })
                .collect();
            seqs.push(vec![EOCS]);
            seqs
        }
        Arch::PsCat => {
            let mut seq = Vec::new();
            for (i, c) in sorted.iter().enumerate() {
                if i > 0 {
                    seq.push(SEP);
                }
                seq.extend(encode(c));
            }
            seq.push(EOS);
            vec![seq]
        }
    }
}

/// Turn a data point into a training instance.  Entity-conditioned points
/// carry their single mention's bounds; full-set points carry none.
pub fn build_instance(point: &DataPoint, vocab: &Vocab, arch: Arch) -> Instance {
    let entity_span = match point.task {
        Task::Acge => {
            let e = &point.entities[0];
            Some((e.start, e.end))
        }
        Task::Acg => None,
    };
    Instance {
        src: Rc::new(vocab.encode_all(&point.context)),
        entity_span,
        seqs: linearize_targets(arch, &point.commands, vocab),
    }
}

/// Teacher-forced negative log-likelihood of the instance's targets,
/// summed over every token of every sequence.
///
/// The flat architectures restart each sequence from the same projected
/// initial state (the encoder runs once per instance, not once per
/// command); the hierarchical one threads a session state through the
/// subsequences instead.
pub fn build_loss(g: &mut Graph, b: &Bound, inst: &Instance, arch: Arch, training: bool) -> NodeId {
    let enc = encode_context(g, b, &inst.src);
    let entity = encode_entity(g, b, &enc, inst.entity_span);
    let mut losses = Vec::with_capacity(inst.target_tokens());
    match arch {
        Arch::PsBs | Arch::PsCat => {
            let init = project_init(g, b, &enc, entity);
            for seq in &inst.seqs {
                let mut state = init;
                let mut prev = BOS;
                for &target in seq {
                    let out = decoder_step(g, b, &enc, state, prev, training);
                    losses.push(g.nll_loss(out.p, target));
                    state = out.state;
                    prev = target;
                }
            }
        }
        Arch::HredPs => {
            let mut q = project_q1(g, b, &enc, entity);
            for seq in &inst.seqs {
                let mut state = q;
                let mut prev = BOS;
                for &target in seq {
                    let out = decoder_step(g, b, &enc, state, prev, training);
                    losses.push(g.nll_loss(out.p, target));
                    state = out.state;
                    prev = target;
                }
                q = session_step(g, b, q, state);
            }
        }
    }
    let stacked = g.concat(&losses, 0);
    g.sum(stacked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autograd::{grad_check, NLL_EPS};
    use crate::network::{init_params, HyperParams};

    fn vocab() -> Vocab {
        let words: Vec<String> =
            "go east west open red box take apple from shelf".split(' ').map(String::from).collect();
        Vocab::build([words.as_slice()])
    }

    fn cmds(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn linearization_shapes_per_architecture() {
        let v = vocab();
        let set = cmds(&["open red box", "go east"]);
        let go: Vec<usize> = vec![v.encode("go"), v.encode("east")];
        let open: Vec<usize> = vec![v.encode("open"), v.encode("red"), v.encode("box")];

        let bs = linearize_targets(Arch::PsBs, &set, &v);
        assert_eq!(bs, vec![[go.clone(), vec![EOS]].concat(), [open.clone(), vec![EOS]].concat()]);

        let hred = linearize_targets(Arch::HredPs, &set, &v);
        assert_eq!(hred.len(), 3);
        assert_eq!(hred[2], vec![EOCS]);

        let cat = linearize_targets(Arch::PsCat, &set, &v);
        assert_eq!(
            cat,
            vec![[go, vec![SEP], open, vec![EOS]].concat()],
            "one sequence: first command, separator, second command, terminator"
        );
    }

    #[test]
    fn linearization_ignores_input_order_and_duplicates() {
        let v = vocab();
        let a = cmds(&["open red box", "go east", "go east"]);
        let b = cmds(&["go east", "open red box"]);
        for arch in Arch::ALL {
            assert_eq!(linearize_targets(arch, &a, &v), linearize_targets(arch, &b, &v));
        }
    }

    #[test]
    fn empty_sets_still_have_a_target() {
        let v = vocab();
        assert_eq!(linearize_targets(Arch::PsBs, &[], &v), vec![vec![EOS]]);
        assert_eq!(linearize_targets(Arch::HredPs, &[], &v), vec![vec![EOCS]]);
        assert_eq!(linearize_targets(Arch::PsCat, &[], &v), vec![vec![EOS]]);
    }

    #[test]
    fn distinct_sets_get_distinct_targets() {
        let v = vocab();
        let sets = [
            cmds(&[]),
            cmds(&["go east"]),
            cmds(&["go west"]),
            cmds(&["go east", "go west"]),
            cmds(&["open red box"]),
            cmds(&["go east", "open red box"]),
        ];
        for arch in Arch::ALL {
            let mut seen = std::collections::HashSet::new();
            for s in &sets {
                assert!(
                    seen.insert(linearize_targets(arch, s, &v)),
                    "{arch} mapped two different sets to one target"
                );
            }
        }
    }

    #[test]
    fn unknown_words_become_unk_targets() {
        let v = vocab();
        let inst = Instance {
            src: Rc::new(vec![0]),
            entity_span: None,
            seqs: linearize_targets(Arch::PsCat, &cmds(&["take mystery gadget"]), &v),
        };
        assert_eq!(inst.unk_targets(), 2);
        assert_eq!(inst.target_tokens(), 4);
    }

    fn tiny_hyper() -> HyperParams {
        HyperParams { d_emb: 3, d_hid: 4, dropout: 0.0, emb_scale: 0.1 }
    }

    fn tiny_instance(arch: Arch, v: &Vocab) -> Instance {
        Instance {
            src: Rc::new(v.encode_all(
                &"open red box go east".split(' ').map(String::from).collect::<Vec<_>>(),
            )),
            entity_span: Some((1, 2)),
            seqs: linearize_targets(arch, &cmds(&["go east", "open red box"]), v),
        }
    }

    #[test]
    fn single_command_loss_is_identical_for_flat_architectures() {
        // With one command, "one sequence per command" and "concatenate
        // all commands" build the very same graph, so the losses must be
        // bit-identical.
        let v = vocab();
        let hyper = tiny_hyper();
        let params = init_params(&hyper, v.len(), 3);
        let loss_of = |arch: Arch| {
            let mut g = Graph::new(0);
            let b = Bound::new(&mut g, &params, hyper);
            let point = DataPoint {
                game_id: "g".into(),
                state_id: "s".into(),
                context: "go east or open red box".split(' ').map(String::from).collect(),
                entities: vec![],
                commands: cmds(&["go east"]),
                task: Task::Acg,
            };
            let inst = build_instance(&point, &v, arch);
            let loss = build_loss(&mut g, &b, &inst, arch, false);
            g.value(loss).item()
        };
        assert_eq!(loss_of(Arch::PsBs).to_bits(), loss_of(Arch::PsCat).to_bits());
    }

    #[test]
    fn neutralized_heads_give_uniform_token_loss() {
        // Zero shortlist output weights make the shortlist uniform; a huge
        // switch bias sends the whole mixture through it.  Every target
        // token then costs exactly -ln(1/V + eps).
        let v = vocab();
        let hyper = tiny_hyper();
        let mut params = init_params(&hyper, v.len(), 5);
        for name in ["shortlist.w2", "shortlist.b2", "switch.w2"] {
            params.get_mut(name).data_mut().iter_mut().for_each(|x| *x = 0.0);
        }
        params.get_mut("switch.b2").data_mut()[0] = 1e3;

        for arch in Arch::ALL {
            let mut g = Graph::new(0);
            let b = Bound::new(&mut g, &params, hyper);
            let inst = tiny_instance(arch, &v);
            let loss = build_loss(&mut g, &b, &inst, arch, false);
            let per_token = -(1.0 / v.len() as f64 + NLL_EPS).ln();
            let want = per_token * inst.target_tokens() as f64;
            let got = g.value(loss).item();
            assert!((got - want).abs() < 1e-9, "{arch}: {got} vs {want}");
        }
    }

    #[test]
    fn hierarchical_loss_depends_on_sequence_order() {
        let v = vocab();
        let hyper = tiny_hyper();
        let params = init_params(&hyper, v.len(), 7);
        let loss_with = |arch: Arch, swap: bool| {
            let mut g = Graph::new(0);
            let b = Bound::new(&mut g, &params, hyper);
            let mut inst = tiny_instance(arch, &v);
            if swap {
                let n = inst.seqs.len();
                inst.seqs.swap(0, if arch == Arch::HredPs { n - 2 } else { n - 1 });
            }
            let loss = build_loss(&mut g, &b, &inst, arch, false);
            g.value(loss).item()
        };
        // Independent sequences: order changes only the summation order.
        let d_flat = (loss_with(Arch::PsBs, false) - loss_with(Arch::PsBs, true)).abs();
        assert!(d_flat < 1e-12, "flat loss moved by {d_flat} under reordering");
        // Session-threaded sequences: order genuinely matters.
        let d_hred = (loss_with(Arch::HredPs, false) - loss_with(Arch::HredPs, true)).abs();
        assert!(d_hred > 1e-9, "session loss ignored sequence order");
    }

    #[test]
    fn losses_backpropagate_correctly_for_all_architectures() {
        let v = vocab();
        let hyper = tiny_hyper();
        for (i, arch) in Arch::ALL.into_iter().enumerate() {
            let params = init_params(&hyper, v.len(), 20 + i as u64);
            let worst = grad_check(&params, 1e-4, |p, g| {
                let b = Bound::new(g, p, hyper);
                let inst = tiny_instance(arch, &v);
                build_loss(g, &b, &inst, arch, false)
            });
            assert!(worst <= 1e-4, "{arch}: worst relative gradient error {worst}");
        }
    }
}
