//! `cmdgen train` — fit one architecture on a dataset split, logging
//! per-epoch metrics and keeping the checkpoint of the best validation
//! epoch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use cmdgen_core::models::Arch;
use cmdgen_core::network::HyperParams;
use cmdgen_core::runtime::{
    load_checkpoint, save_checkpoint, train, Checkpoint, OptimKind, PredictConfig, TrainConfig,
};
use cmdgen_core::textcorpus::{load_jsonl, tokenize, Vocab};

use crate::settings::{io_err, CliError, Settings};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Manifest file with key=value settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory derived file names hang off.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Architecture: ps_bs, hred_ps, or ps_cat.
    #[arg(long)]
    arch: Option<String>,
    /// Task the dataset files belong to (acg or acge).
    #[arg(long)]
    task: Option<String>,
    /// Training split.
    #[arg(long)]
    train_data: Option<PathBuf>,
    /// Validation split (drives checkpoint selection and early stopping).
    #[arg(long)]
    valid_data: Option<PathBuf>,
    /// Where the best checkpoint is written.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Where per-epoch metrics are appended as JSON lines.
    #[arg(long)]
    metrics_log: Option<PathBuf>,
    /// Epochs to run in this invocation.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Global gradient-norm clip threshold.
    #[arg(long)]
    clip: Option<f64>,
    /// Optimizer: sgd or adam.
    #[arg(long)]
    optim: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Epochs without improvement before stopping early (0 disables).
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    /// Embedding width.
    #[arg(long)]
    d_emb: Option<usize>,
    /// Recurrent state width.
    #[arg(long)]
    d_hid: Option<usize>,
    /// Beam width for validation decoding.
    #[arg(long)]
    beam_width: Option<usize>,
    /// Beams kept as the predicted set (flat beam-search decoding only).
    #[arg(long)]
    top_k: Option<usize>,
    /// Token budget per decoded command.
    #[arg(long)]
    cmd_len_cap: Option<usize>,
    /// Command budget per decoded set.
    #[arg(long)]
    session_cap: Option<usize>,
    /// Rank beams by per-token log-probability.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    length_norm: Option<bool>,
    /// Continue training from an existing checkpoint; epoch numbering,
    /// shuffling, and the seed carry over from it.
    #[arg(long)]
    resume: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> Result<(), CliError> {
    let mut s = Settings::load(args.config.as_deref())?;
    s.set("out_dir", args.out_dir.map(|p| p.display().to_string()));
    s.set("arch", args.arch);
    s.set("task", args.task);
    s.set("train_data", args.train_data.map(|p| p.display().to_string()));
    s.set("valid_data", args.valid_data.map(|p| p.display().to_string()));
    s.set("checkpoint", args.checkpoint.map(|p| p.display().to_string()));
    s.set("metrics_log", args.metrics_log.map(|p| p.display().to_string()));
    s.set("epochs", args.epochs);
    s.set("lr", args.lr);
    s.set("clip", args.clip);
    s.set("optim", args.optim);
    s.set("seed", args.seed);
    s.set("patience", args.patience);
    s.set("dropout", args.dropout);
    s.set("d_emb", args.d_emb);
    s.set("d_hid", args.d_hid);
    s.set("beam_width", args.beam_width);
    s.set("top_k", args.top_k);
    s.set("cmd_len_cap", args.cmd_len_cap);
    s.set("session_cap", args.session_cap);
    s.set("length_norm", args.length_norm);

    let arch_name = s
        .raw("arch")
        .ok_or_else(|| CliError::Contract("no architecture: set --arch or arch".into()))?;
    let arch = Arch::parse(arch_name).ok_or_else(|| {
        CliError::Contract(format!(
            "unknown architecture {arch_name:?}: expected ps_bs, hred_ps, or ps_cat"
        ))
    })?;
    let task = s.task()?;
    let t = task.as_str();

    let train_path = s.path_or_derived("train_data", &format!("{t}_train.jsonl"))?;
    let valid_path = s.path_or_derived("valid_data", &format!("{t}_valid.jsonl"))?;
    let (_, train_points) = load_jsonl(&train_path)?;
    let (_, valid_points) = load_jsonl(&valid_path)?;
    if train_points.is_empty() {
        return Err(CliError::Contract(format!(
            "{}: training split is empty",
            train_path.display()
        )));
    }

    let dflt = TrainConfig::default();
    let resumed = match &args.resume {
        Some(p) => Some(load_checkpoint(p)?),
        None => None,
    };
    let (vocab, hyper, seed, init) = match resumed {
        Some(ck) => {
            let ck_arch = ck.arch()?;
            if ck_arch != arch {
                return Err(CliError::Contract(format!(
                    "checkpoint was trained as {ck_arch}, asked to resume as {arch}"
                )));
            }
            for (key, have) in [("d_emb", ck.hyper.d_emb), ("d_hid", ck.hyper.d_hid)] {
                if let Some(want) = s.get::<usize>(key)? {
                    if want != have {
                        return Err(CliError::Contract(format!(
                            "{key} = {want} conflicts with the checkpoint's {key} = {have}"
                        )));
                    }
                }
            }
            if let Some(want) = s.get::<u64>("seed")? {
                if want != ck.seed {
                    return Err(CliError::Contract(format!(
                        "seed = {want} conflicts with checkpoint seed {}; resuming continues \
                         the original streams",
                        ck.seed
                    )));
                }
            }
            let hyper = HyperParams {
                dropout: s.get_or("dropout", ck.hyper.dropout)?,
                ..ck.hyper
            };
            let vocab = ck.vocab()?;
            (vocab, hyper, ck.seed, Some((ck.to_params(), ck.epochs_done)))
        }
        None => {
            let dh = HyperParams::default();
            let hyper = HyperParams {
                d_emb: s.get_or("d_emb", dh.d_emb)?,
                d_hid: s.get_or("d_hid", dh.d_hid)?,
                dropout: s.get_or("dropout", dh.dropout)?,
                emb_scale: s.get_or("emb_scale", dh.emb_scale)?,
            };
            let streams: Vec<Vec<String>> = train_points
                .iter()
                .flat_map(|p| {
                    std::iter::once(p.context.clone())
                        .chain(p.commands.iter().map(|c| tokenize(c)))
                })
                .collect();
            let vocab = Vocab::build(streams.iter().map(Vec::as_slice));
            (vocab, hyper, s.get_or("seed", dflt.seed)?, None)
        }
    };

    let dp = PredictConfig::for_task(task);
    let predict = PredictConfig {
        beam_width: s.get_or("beam_width", dp.beam_width)?,
        top_k: s.get_or("top_k", dp.top_k)?,
        cmd_len_cap: s.get_or("cmd_len_cap", dp.cmd_len_cap)?,
        session_cap: s.get_or("session_cap", dp.session_cap)?,
        length_normalize: s.get_or("length_norm", dp.length_normalize)?,
    };
    if predict.top_k > predict.beam_width {
        return Err(CliError::Contract(format!(
            "top_k {} exceeds beam_width {}",
            predict.top_k, predict.beam_width
        )));
    }

    let optim_name = s.raw("optim").unwrap_or("adam");
    let cfg = TrainConfig {
        epochs: s.get_or("epochs", dflt.epochs)?,
        lr: s.get_or("lr", dflt.lr)?,
        clip: s.get_or("clip", dflt.clip)?,
        optim: OptimKind::parse(optim_name).ok_or_else(|| {
            CliError::Contract(format!("unknown optimizer {optim_name:?}: expected sgd or adam"))
        })?,
        seed,
        patience: s.get_or("patience", dflt.patience)?,
        hyper,
        predict,
    };
    if cfg.epochs == 0 {
        return Err(CliError::Contract("epochs must be at least 1".into()));
    }
    if cfg.lr <= 0.0 || cfg.clip <= 0.0 {
        return Err(CliError::Contract(format!(
            "lr {} and clip {} must both be positive",
            cfg.lr, cfg.clip
        )));
    }

    let ck_path = s.path_or_derived("checkpoint", &format!("{arch}_{t}.ckpt.json"))?;
    let log_path = s
        .path("metrics_log")
        .or_else(|| s.path("out_dir").map(|d| d.join(format!("{arch}_{t}.metrics.jsonl"))));
    let mut log = match &log_path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?);
            let meta = serde_json::json!({ "_meta": s.meta(Some(seed)) });
            writeln!(w, "{meta}").map_err(|e| io_err(p, e))?;
            Some(w)
        }
        None => None,
    };

    let mut log_err: Option<std::io::Error> = None;
    let outcome = train(arch, &cfg, &vocab, &train_points, &valid_points, init, |m| {
        println!(
            "epoch {:>3}  loss {:>8.4}  valid P {:.3} R {:.3} F1 {:.3}  ({:.1}s)",
            m.epoch, m.train_loss, m.valid_precision, m.valid_recall, m.valid_f1, m.seconds
        );
        if let Some(w) = log.as_mut() {
            let line = serde_json::to_string(m).expect("metrics always serialize");
            if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                log_err = Some(e);
            }
        }
    })?;
    if let Some(e) = log_err {
        return Err(io_err(log_path.as_ref().expect("logged, so the path exists"), e));
    }

    let ck = Checkpoint::new(
        arch,
        hyper,
        cfg.seed,
        outcome.epochs_done,
        outcome.best_valid_f1,
        &vocab,
        &outcome.params,
    );
    save_checkpoint(&ck_path, &ck)?;

    let best = outcome
        .history
        .iter()
        .find(|m| m.epoch == outcome.best_epoch)
        .expect("the best epoch is part of this run");
    println!(
        "best epoch {}: valid P {:.4} R {:.4} F1 {:.4}",
        best.epoch, best.valid_precision, best.valid_recall, best.valid_f1
    );
    println!("checkpoint: {}", ck_path.display());
    Ok(())
}
