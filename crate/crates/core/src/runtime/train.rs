//! Mini-batch-of-one training with per-epoch validation.

use std::collections::HashSet;
use std::time::Instant;

use crate::autograd::{Graph, Params};
use crate::eval::{aggregate, EvalPoint};
use crate::models::{build_instance, build_loss, Arch, Instance};
use crate::network::{init_params, Bound, HyperParams};
use crate::rng::{mix64, Rng};
use crate::runtime::optim::{OptimKind, Optimizer};
use crate::runtime::predict::{predict_dataset, PredictConfig};
use crate::runtime::RuntimeError;
use crate::textcorpus::{DataPoint, Vocab};

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub clip: f64,
    pub optim: OptimKind,
    pub seed: u64,
    /// Stop after this many epochs without a validation-F1 improvement;
    /// zero disables early stopping.
    pub patience: usize,
    pub hyper: HyperParams,
    pub predict: PredictConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            lr: 1e-3,
            clip: 5.0,
            optim: OptimKind::Adam,
            seed: 1,
            patience: 5,
            hyper: HyperParams::default(),
            predict: PredictConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean negative log-likelihood per target token over the epoch.
    pub train_loss: f64,
    /// Micro-averaged scores of greedy/beam predictions on the
    /// validation split.
    pub valid_precision: f64,
    pub valid_recall: f64,
    pub valid_f1: f64,
    pub seconds: f64,
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub params: Params,
    pub best_epoch: usize,
    pub best_valid_f1: f64,
    /// Epochs run by this call.
    pub epochs_run: usize,
    /// Lifetime epoch count, resumed training included.
    pub epochs_done: usize,
    pub history: Vec<EpochMetrics>,
}

/// One forward/backward/update on a single instance.  Returns the loss,
/// or `None` if it was not finite (the update is then *not* applied).
fn instance_update(
    params: &mut Params,
    opt: &mut Optimizer,
    cfg: &TrainConfig,
    arch: Arch,
    inst: &Instance,
    graph_seed: u64,
) -> Option<f64> {
    let mut g = Graph::new(graph_seed);
    let bound = Bound::new(&mut g, params, cfg.hyper);
    let loss = build_loss(&mut g, &bound, inst, arch, true);
    let value = g.value(loss).item();
    if !value.is_finite() {
        return None;
    }
    g.backward(loss);
    let grads: Vec<(String, Vec<f64>)> = params
        .iter()
        .filter_map(|(name, _)| g.grad(bound.get(name)).map(|gr| (name.to_string(), gr.to_vec())))
        .collect();
    opt.step(params, &grads);
    Some(value)
}

/// Train `arch` for `cfg.epochs` further epochs.  One optimizer step per
/// instance, instances reshuffled every epoch, the whole run a pure
/// function of the config, so equal configs yield bit-equal parameters.
/// Fails fast if the loss leaves the finite range.
///
/// `init` resumes from previously trained parameters plus the number of
/// epochs they already saw; epoch numbering, shuffling, and dropout
/// streams continue from there.  Optimizer moments start fresh.
pub fn train(
    arch: Arch,
    cfg: &TrainConfig,
    vocab: &Vocab,
    train_points: &[DataPoint],
    valid_points: &[DataPoint],
    init: Option<(Params, usize)>,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome, RuntimeError> {
    assert!(cfg.epochs > 0, "need at least one epoch");
    let instances: Vec<Instance> =
        train_points.iter().map(|p| build_instance(p, vocab, arch)).collect();
    let (mut params, done_before) = match init {
        Some((p, done)) => (p, done),
        None => (init_params(&cfg.hyper, vocab.len(), cfg.seed), 0),
    };
    let mut opt = Optimizer::new(cfg.optim, cfg.lr, cfg.clip);
    let shuffler = Rng::new(mix64(cfg.seed, 0x5u64));
    let no_seen: HashSet<String> = HashSet::new();

    let mut best: Option<(f64, Params, usize)> = None;
    let mut since_best = 0usize;
    let mut history: Vec<EpochMetrics> = Vec::new();

    for epoch in done_before..done_before + cfg.epochs {
        let started = Instant::now();
        let mut order: Vec<usize> = (0..instances.len()).collect();
        shuffler.split(epoch as u64).shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut token_sum = 0usize;
        for &idx in &order {
            let inst = &instances[idx];
            let graph_seed = mix64(cfg.seed, mix64(epoch as u64, idx as u64));
            let value = instance_update(&mut params, &mut opt, cfg, arch, inst, graph_seed)
                .ok_or(RuntimeError::NonFinite { epoch, instance: idx })?;
            loss_sum += value;
            token_sum += inst.target_tokens();
        }

        let preds = predict_dataset(&params, cfg.hyper, vocab, arch, valid_points, &cfg.predict);
        let scored: Vec<EvalPoint> = preds
            .into_iter()
            .zip(valid_points)
            .map(|(pred, p)| EvalPoint { pred: pred.commands, gold: p.commands.clone() })
            .collect();
        let valid = aggregate(&scored, &no_seen).micro;

        let metrics = EpochMetrics {
            epoch,
            train_loss: loss_sum / token_sum.max(1) as f64,
            valid_precision: valid.precision,
            valid_recall: valid.recall,
            valid_f1: valid.f1,
            seconds: started.elapsed().as_secs_f64(),
        };
        on_epoch(&metrics);
        history.push(metrics);

        if best.as_ref().is_none_or(|(f1, _, _)| valid.f1 > *f1) {
            best = Some((valid.f1, params.clone(), epoch));
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience > 0 && since_best >= cfg.patience {
                break;
            }
        }
    }

    let (best_valid_f1, best_params, best_epoch) = best.expect("ran at least one epoch");
    Ok(TrainOutcome {
        params: best_params,
        best_epoch,
        best_valid_f1,
        epochs_run: history.len(),
        epochs_done: done_before + history.len(),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textcorpus::Task;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    fn dataset() -> (Vocab, Vec<DataPoint>) {
        let raw = [
            ("you see a closed red box . there is an exit to the east .", vec!["go east", "open red box"]),
            ("you see an open red box . there is an exit to the east .", vec!["go east", "close red box"]),
            ("there is an apple on the floor . there is an exit to the west .", vec!["go west", "take apple"]),
        ];
        let points: Vec<DataPoint> = raw
            .iter()
            .enumerate()
            .map(|(i, (ctx, cmds))| DataPoint {
                game_id: "g0".into(),
                state_id: format!("g0_s{i:03}"),
                context: toks(ctx),
                entities: vec![],
                commands: cmds.iter().map(|s| s.to_string()).collect(),
                task: Task::Acg,
            })
            .collect();
        let streams: Vec<Vec<String>> = points
            .iter()
            .flat_map(|p| {
                std::iter::once(p.context.clone()).chain(p.commands.iter().map(|c| toks(c)))
            })
            .collect();
        let vocab = Vocab::build(streams.iter().map(Vec::as_slice));
        (vocab, points)
    }

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            lr: 3e-3,
            seed: 11,
            patience: 0,
            hyper: HyperParams { d_emb: 4, d_hid: 8, dropout: 0.1, emb_scale: 0.1 },
            predict: PredictConfig {
                beam_width: 3,
                top_k: 3,
                cmd_len_cap: 6,
                session_cap: 5,
                length_normalize: false,
            },
            ..TrainConfig::default()
        }
    }

    #[test]
    fn loss_falls_and_equal_seeds_give_equal_parameters() {
        let (vocab, points) = dataset();
        let cfg = tiny_cfg();
        let run = |cfg: &TrainConfig| {
            train(Arch::PsCat, cfg, &vocab, &points, &points[..1], None, |_| {}).unwrap()
        };
        let a = run(&cfg);
        assert!(
            a.history.last().unwrap().train_loss < a.history[0].train_loss,
            "loss went {} -> {}",
            a.history[0].train_loss,
            a.history.last().unwrap().train_loss
        );

        let b = run(&cfg);
        for ((name_a, ta), (_, tb)) in a.params.iter().zip(b.params.iter()) {
            for (x, y) in ta.data().iter().zip(tb.data()) {
                assert_eq!(x.to_bits(), y.to_bits(), "{name_a} differs between equal runs");
            }
        }

        let c = run(&TrainConfig { seed: 12, ..cfg });
        let same = a
            .params
            .iter()
            .zip(c.params.iter())
            .all(|((_, ta), (_, tb))| ta.data() == tb.data());
        assert!(!same, "different seeds produced identical parameters");
    }

    #[test]
    fn one_easy_point_is_memorized_to_perfect_f1() {
        let (vocab, points) = dataset();
        let cfg = TrainConfig {
            epochs: 500,
            lr: 3e-2,
            seed: 3,
            patience: 0,
            hyper: HyperParams { d_emb: 8, d_hid: 16, dropout: 0.0, emb_scale: 0.1 },
            predict: PredictConfig {
                beam_width: 3,
                top_k: 3,
                cmd_len_cap: 8,
                session_cap: 5,
                length_normalize: false,
            },
            ..TrainConfig::default()
        };
        let out =
            train(Arch::PsCat, &cfg, &vocab, &points[..1], &points[..1], None, |_| {}).unwrap();
        assert_eq!(out.best_valid_f1, 1.0, "history: {:?}", out.history);
        // With a single instance each epoch is one optimizer step; two
        // hundred of them should be plenty to memorize one target.
        assert!(
            out.history[199].train_loss < 0.1,
            "loss after 200 steps: {}",
            out.history[199].train_loss
        );
    }

    #[test]
    fn non_finite_losses_stop_the_run_without_touching_parameters() {
        let (vocab, points) = dataset();
        let cfg = tiny_cfg();
        let inst = build_instance(&points[0], &vocab, Arch::PsCat);
        let mut params = init_params(&cfg.hyper, vocab.len(), cfg.seed);
        params.get_mut("emb").data_mut().iter_mut().for_each(|x| *x = f64::NAN);
        let before: Vec<f64> = params.get("att.v").data().to_vec();
        let mut opt = Optimizer::new(cfg.optim, cfg.lr, cfg.clip);
        let got = instance_update(&mut params, &mut opt, &cfg, Arch::PsCat, &inst, 0);
        assert_eq!(got, None);
        assert_eq!(params.get("att.v").data(), before.as_slice());
    }

    #[test]
    fn early_stopping_respects_patience() {
        let (vocab, points) = dataset();
        // No validation points: F1 is constant, so the first epoch is best
        // and patience expires exactly two epochs later.
        let cfg = TrainConfig { epochs: 50, patience: 2, ..tiny_cfg() };
        let out = train(Arch::PsCat, &cfg, &vocab, &points, &[], None, |_| {}).unwrap();
        assert_eq!(out.epochs_run, 3);
        assert_eq!(out.best_epoch, 0);
    }

    #[test]
    fn resumed_training_continues_the_epoch_numbering() {
        let (vocab, points) = dataset();
        let cfg = tiny_cfg();
        let first = train(Arch::PsCat, &cfg, &vocab, &points, &points, None, |_| {}).unwrap();
        assert_eq!(first.epochs_done, 3);

        let resumed = train(
            Arch::PsCat,
            &TrainConfig { epochs: 2, ..cfg },
            &vocab,
            &points,
            &points,
            Some((first.params, first.epochs_done)),
            |_| {},
        )
        .unwrap();
        let epochs: Vec<usize> = resumed.history.iter().map(|m| m.epoch).collect();
        assert_eq!(epochs, [3, 4]);
        assert_eq!(resumed.epochs_run, 2);
        assert_eq!(resumed.epochs_done, 5);
        assert!(resumed.best_epoch >= 3);
    }

    #[test]
    fn every_architecture_trains_without_incident() {
        let (vocab, points) = dataset();
        let cfg = TrainConfig { epochs: 2, ..tiny_cfg() };
        for arch in Arch::ALL {
            let mut calls = 0;
            let out = train(arch, &cfg, &vocab, &points, &points, None, |_| calls += 1).unwrap();
            assert_eq!(out.epochs_run, 2, "{arch}");
            assert_eq!(calls, 2, "{arch}: epoch callback fired {calls} times");
            assert!(out.history.iter().all(|m| m.train_loss.is_finite()), "{arch}");
        }
    }
}
