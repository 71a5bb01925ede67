//! Beam search over any step decoder.

/// One autoregressive decoding step: given a carried state and the
/// previously emitted token, produce a probability distribution over the
/// vocabulary and the next state.
pub trait StepDecoder {
    type State: Clone;
    fn step(&mut self, state: &Self::State, prev: usize) -> (Vec<f64>, Self::State);
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    /// Emitted tokens, including the stop token when `finished`.
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub finished: bool,
}

struct Cand<S> {
    tokens: Vec<usize>,
    log_prob: f64,
    state: S,
}

fn score(log_prob: f64, len: usize, normalize: bool) -> f64 {
    if normalize {
        log_prob / len.max(1) as f64
    } else {
        log_prob
    }
}

fn rank<S>(cands: &mut [Cand<S>], normalize: bool) {
    cands.sort_by(|a, b| {
        let sa = score(a.log_prob, a.tokens.len(), normalize);
        let sb = score(b.log_prob, b.tokens.len(), normalize);
        sb.total_cmp(&sa).then_with(|| a.tokens.cmp(&b.tokens))
    });
}

/// Width-limited best-first search for high-probability stop-terminated
/// sequences.
///
/// Each round expands every live hypothesis over the whole vocabulary and
/// keeps the `width` best candidates — finished and unfinished compete
/// for the same slots, so `beam_search` with width 1 follows exactly the
/// greedy path.  Finished candidates retire and free their slot for the
/// next round; the search ends once `width` hypotheses have finished or
/// `max_len` steps have run.  A hypothesis scores as its summed token
/// log-probabilities, divided by its length when `normalize` is set.
/// Ties break toward the lexicographically smaller token sequence.
///
/// Returns up to `width` hypotheses, best first.  If nothing finished
/// in time, the surviving unfinished hypotheses are returned instead,
/// marked accordingly.
pub fn beam_search<D: StepDecoder>(
    dec: &mut D,
    init: D::State,
    bos: usize,
    width: usize,
    max_len: usize,
    stops: &[usize],
    normalize: bool,
) -> Vec<Hypothesis> {
    assert!(width > 0, "beam width must be positive");
    let mut live = vec![Cand { tokens: Vec::new(), log_prob: 0.0, state: init }];
    let mut done: Vec<Hypothesis> = Vec::new();
    for _ in 0..max_len {
        if live.is_empty() || done.len() >= width {
            break;
        }
        let mut next: Vec<Cand<D::State>> = Vec::new();
        for cand in &live {
            let prev = *cand.tokens.last().unwrap_or(&bos);
            let (dist, state) = dec.step(&cand.state, prev);
            for (tok, &p) in dist.iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let mut tokens = cand.tokens.clone();
                tokens.push(tok);
                next.push(Cand { tokens, log_prob: cand.log_prob + p.ln(), state: state.clone() });
            }
        }
        rank(&mut next, normalize);
        next.truncate(width);
        live = Vec::new();
        for cand in next {
            if stops.contains(cand.tokens.last().expect("candidates are never empty")) {
                done.push(Hypothesis {
                    tokens: cand.tokens,
                    log_prob: cand.log_prob,
                    finished: true,
                });
            } else {
                live.push(cand);
            }
        }
    }
    let mut out = if done.is_empty() {
        live.into_iter()
            .map(|c| Hypothesis { tokens: c.tokens, log_prob: c.log_prob, finished: false })
            .collect()
    } else {
        done
    };
    out.sort_by(|a, b| {
        let sa = score(a.log_prob, a.tokens.len(), normalize);
        let sb = score(b.log_prob, b.tokens.len(), normalize);
        sb.total_cmp(&sa).then_with(|| a.tokens.cmp(&b.tokens))
    });
    out.truncate(width);
    out
}

/// Follow the argmax token at every step (lowest id on ties).  Also
/// returns the decoder state after the final step, which hierarchical
/// session decoding feeds forward.
pub fn greedy<D: StepDecoder>(
    dec: &mut D,
    init: D::State,
    bos: usize,
    max_len: usize,
    stops: &[usize],
) -> (Hypothesis, D::State) {
    let mut state = init;
    let mut prev = bos;
    let mut tokens = Vec::new();
    let mut log_prob = 0.0;
    let mut finished = false;
    for _ in 0..max_len {
        let (dist, next) = dec.step(&state, prev);
        let (tok, p) = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(&a.0)))
            .expect("empty distribution");
        tokens.push(tok);
        log_prob += p.ln();
        state = next;
        prev = tok;
        if stops.contains(&tok) {
            finished = true;
            break;
        }
    }
    (Hypothesis { tokens, log_prob, finished }, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{mix64, Rng};

    /// Emits a fixed distribution per time step, ignoring the token fed in.
    struct TableDecoder {
        tables: Vec<Vec<f64>>,
    }

    impl StepDecoder for TableDecoder {
        type State = usize;
        fn step(&mut self, state: &usize, _prev: usize) -> (Vec<f64>, usize) {
            let t = (*state).min(self.tables.len() - 1);
            (self.tables[t].clone(), state + 1)
        }
    }

    /// Every stop-terminated sequence of length <= max_len with its
    /// probability, best first.
    fn enumerate_all(tables: &[Vec<f64>], max_len: usize, stops: &[usize]) -> Vec<(Vec<usize>, f64)> {
        fn rec(
            tables: &[Vec<f64>],
            stops: &[usize],
            t: usize,
            max_len: usize,
            prefix: &mut Vec<usize>,
            p: f64,
            out: &mut Vec<(Vec<usize>, f64)>,
        ) {
            if t == max_len {
                return;
            }
            let dist = &tables[t.min(tables.len() - 1)];
            for (tok, &q) in dist.iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                prefix.push(tok);
                if stops.contains(&tok) {
                    out.push((prefix.clone(), p * q));
                } else {
                    rec(tables, stops, t + 1, max_len, prefix, p * q, out);
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(tables, stops, 0, max_len, &mut Vec::new(), 1.0, &mut out);
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    // Vocabulary: 0 = a, 1 = b, 2 = c, 3 = stop.
    fn toy_tables() -> Vec<Vec<f64>> {
        vec![
            vec![0.4, 0.3, 0.2, 0.1],
            vec![0.05, 0.05, 0.1, 0.8],
            vec![0.25, 0.25, 0.25, 0.25],
        ]
    }

    #[test]
    fn toy_beam_matches_exhaustive_enumeration() {
        let tables = toy_tables();
        let beam = beam_search(&mut TableDecoder { tables: tables.clone() }, 0, 9, 4, 3, &[3], false);
        let all = enumerate_all(&tables, 3, &[3]);
        assert_eq!(beam.len(), 4);
        for (hyp, (tokens, p)) in beam.iter().zip(&all) {
            assert_eq!(&hyp.tokens, tokens);
            assert!((hyp.log_prob - p.ln()).abs() < 1e-12);
            assert!(hyp.finished);
        }
    }

    #[test]
    fn toy_beam_matches_hand_computed_ranking() {
        let beam = beam_search(&mut TableDecoder { tables: toy_tables() }, 0, 9, 4, 3, &[3], false);
        let got: Vec<(Vec<usize>, f64)> =
            beam.iter().map(|h| (h.tokens.clone(), h.log_prob.exp())).collect();
        let want = [
            (vec![0, 3], 0.32),
            (vec![1, 3], 0.24),
            (vec![2, 3], 0.16),
            (vec![3], 0.1),
        ];
        for ((gt, gp), (wt, wp)) in got.iter().zip(&want) {
            assert_eq!(gt, wt);
            assert!((gp - wp).abs() < 1e-12, "{gp} vs {wp}");
        }
    }

    /// Distribution depends deterministically on (state, prev).
    struct RandomDecoder {
        seed: u64,
        vocab: usize,
    }

    impl StepDecoder for RandomDecoder {
        type State = u64;
        fn step(&mut self, state: &u64, prev: usize) -> (Vec<f64>, u64) {
            let mut r = Rng::new(mix64(self.seed, mix64(*state, prev as u64)));
            let w: Vec<f64> = (0..self.vocab).map(|_| r.uniform(0.01, 1.0)).collect();
            let total: f64 = w.iter().sum();
            (w.iter().map(|x| x / total).collect(), mix64(*state, prev as u64 + 1))
        }
    }

    #[test]
    fn width_one_beam_is_greedy() {
        for seed in 0..100 {
            let mut a = RandomDecoder { seed, vocab: 5 };
            let beam = beam_search(&mut a, 1, 9, 1, 6, &[4], false);
            let mut b = RandomDecoder { seed, vocab: 5 };
            let (hyp, _) = greedy(&mut b, 1, 9, 6, &[4]);
            assert_eq!(beam.len(), 1, "seed {seed}");
            assert_eq!(beam[0].tokens, hyp.tokens, "seed {seed}");
            assert!((beam[0].log_prob - hyp.log_prob).abs() < 1e-12, "seed {seed}");
            assert_eq!(beam[0].finished, hyp.finished, "seed {seed}");
        }
    }

    #[test]
    fn unfinished_hypotheses_surface_when_nothing_stops() {
        // The stop token has zero probability everywhere.
        let tables = vec![vec![0.5, 0.3, 0.2, 0.0]];
        let beam = beam_search(&mut TableDecoder { tables }, 0, 9, 3, 2, &[3], false);
        assert_eq!(beam.len(), 3);
        for hyp in &beam {
            assert!(!hyp.finished);
            assert_eq!(hyp.tokens.len(), 2);
        }
        assert_eq!(beam[0].tokens, vec![0, 0]);
    }

    #[test]
    fn exact_ties_break_lexicographically() {
        // Uniform distribution and no stop token: every surviving
        // hypothesis has the same probability, so ranking falls back to
        // token order.
        let tables = vec![vec![0.25, 0.25, 0.25, 0.25]];
        let beam = beam_search(&mut TableDecoder { tables }, 0, 9, 4, 2, &[], false);
        let toks: Vec<&Vec<usize>> = beam.iter().map(|h| &h.tokens).collect();
        assert_eq!(toks, [&vec![0, 0], &vec![0, 1], &vec![0, 2], &vec![0, 3]]);
    }

    /// Distribution depends only on the previous token.
    struct PrevKeyed;

    impl StepDecoder for PrevKeyed {
        type State = ();
        fn step(&mut self, _state: &(), prev: usize) -> (Vec<f64>, ()) {
            // Vocabulary: 0 = a, 1 = b, 2 = x, 3 = stop; 9 is the start
            // marker.  "a stop" has raw probability 0.36 over two tokens,
            // "b x stop" 0.324 over three.
            let dist = match prev {
                9 => vec![0.4, 0.45, 0.0, 0.15],
                0 => vec![0.0, 0.0, 0.1, 0.9],
                1 => vec![0.1, 0.0, 0.8, 0.1],
                2 => vec![0.05, 0.05, 0.0, 0.9],
                _ => unreachable!("no continuation past the stop token"),
            };
            (dist, ())
        }
    }

    #[test]
    fn length_normalization_promotes_longer_sequences() {
        let raw = beam_search(&mut PrevKeyed, (), 9, 2, 4, &[3], false);
        let toks: Vec<&Vec<usize>> = raw.iter().map(|h| &h.tokens).collect();
        assert_eq!(toks, [&vec![0, 3], &vec![1, 2, 3]]);

        // ln(0.324) / 3 beats ln(0.36) / 2, so the per-token ranking
        // flips the order.
        let norm = beam_search(&mut PrevKeyed, (), 9, 2, 4, &[3], true);
        let toks: Vec<&Vec<usize>> = norm.iter().map(|h| &h.tokens).collect();
        assert_eq!(toks, [&vec![1, 2, 3], &vec![0, 3]]);
    }

    #[test]
    fn greedy_reports_the_followed_path_probability() {
        let (hyp, state) = greedy(&mut TableDecoder { tables: toy_tables() }, 0, 9, 5, &[3]);
        assert_eq!(hyp.tokens, vec![0, 3]);
        assert!((hyp.log_prob - (0.4_f64 * 0.8).ln()).abs() < 1e-12);
        assert!(hyp.finished);
        assert_eq!(state, 2, "state advanced once per emitted token");
    }
}
