//! `cmdgen predict` — decode predicted command sets from a checkpoint
//! into a JSON-Lines file, optionally showing them next to the gold
//! sets.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::Args;
use cmdgen_core::models::Arch;
use cmdgen_core::runtime::{load_checkpoint, predict_dataset, PredictConfig};
use cmdgen_core::textcorpus::{load_jsonl, seen_command_set, DataPoint, Task};

use crate::settings::{io_err, CliError, Settings};

/// One line of a predictions file.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct PredLine {
    pub state_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
    pub predicted: Vec<String>,
    /// Set when a decode hit a budget cap before terminating cleanly.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

pub fn entity_of(point: &DataPoint) -> Option<String> {
    match point.task {
        Task::Acge => point.entities.first().map(|e| e.name.clone()),
        Task::Acg => None,
    }
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Manifest file with key=value settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory derived file names hang off.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Checkpoint to decode with.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Architecture tag, used only to derive file names when --checkpoint
    /// or --out are not given explicitly.
    #[arg(long)]
    arch: Option<String>,
    /// Task the dataset files belong to (acg or acge).
    #[arg(long)]
    task: Option<String>,
    /// Dataset to predict for (defaults to the test split).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Where predictions are written.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Beam width for flat beam-search decoding.
    #[arg(long)]
    beam_width: Option<usize>,
    /// Beams kept as the predicted set.
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
    /// Print predictions next to gold sets, flagging commands that never
    /// occur in the training split.
    #[arg(long)]
    show: bool,
    /// Training split for the --show unseen-command flags.
    #[arg(long)]
    train_data: Option<PathBuf>,
}

pub fn run(args: PredictArgs) -> Result<(), CliError> {
    let mut s = Settings::load(args.config.as_deref())?;
    s.set("out_dir", args.out_dir.map(|p| p.display().to_string()));
    s.set("checkpoint", args.checkpoint.map(|p| p.display().to_string()));
    s.set("arch", args.arch);
    s.set("task", args.task);
    s.set("data", args.data.map(|p| p.display().to_string()));
    s.set("predictions", args.out.map(|p| p.display().to_string()));
    s.set("train_data", args.train_data.map(|p| p.display().to_string()));
    s.set("beam_width", args.beam_width);
    s.set("top_k", args.top_k);
    s.set("cmd_len_cap", args.cmd_len_cap);
    s.set("session_cap", args.session_cap);
    s.set("length_norm", args.length_norm);

    let t = s.task()?.as_str();
    let ck_path = match s.path("checkpoint") {
        Some(p) => p,
        None => {
            let arch = settings_arch(&s, "no checkpoint: set --checkpoint, or --arch + out_dir")?;
            s.path_or_derived("checkpoint", &format!("{arch}_{t}.ckpt.json"))?
        }
    };
    let ck = load_checkpoint(&ck_path)?;
    let arch = ck.arch()?;
    let vocab = ck.vocab()?;
    let params = ck.to_params();

    let data_path = s.path_or_derived("data", &format!("{t}_test.jsonl"))?;
    let (_, points) = load_jsonl(&data_path)?;
    let task = points.first().map(|p| p.task).unwrap_or(s.task()?);

    let dp = PredictConfig::for_task(task);
    let cfg = PredictConfig {
        beam_width: s.get_or("beam_width", dp.beam_width)?,
        top_k: s.get_or("top_k", dp.top_k)?,
        cmd_len_cap: s.get_or("cmd_len_cap", dp.cmd_len_cap)?,
        session_cap: s.get_or("session_cap", dp.session_cap)?,
        length_normalize: s.get_or("length_norm", dp.length_normalize)?,
    };
    if cfg.top_k > cfg.beam_width {
        return Err(CliError::Contract(format!(
            "top_k {} exceeds beam_width {}: the predicted set is drawn from the beams",
            cfg.top_k, cfg.beam_width
        )));
    }

    let preds = predict_dataset(&params, ck.hyper, &vocab, arch, &points, &cfg);

    let out_path = s.path_or_derived("predictions", &format!("{arch}_{t}.pred.jsonl"))?;
    let mut w = BufWriter::new(File::create(&out_path).map_err(|e| io_err(&out_path, e))?);
    let meta = serde_json::json!({ "_meta": s.meta(Some(ck.seed)) });
    writeln!(w, "{meta}").map_err(|e| io_err(&out_path, e))?;
    for (point, pred) in points.iter().zip(&preds) {
        let line = PredLine {
            state_id: point.state_id.clone(),
            entity: entity_of(point),
            predicted: pred.commands.clone(),
            truncated: pred.truncated,
        };
        let json = serde_json::to_string(&line).expect("predictions always serialize");
        writeln!(w, "{json}").map_err(|e| io_err(&out_path, e))?;
    }
    w.flush().map_err(|e| io_err(&out_path, e))?;
    println!("wrote {} predictions to {}", points.len(), out_path.display());

    if args.show {
        let train_path =
            s.path_or_derived("train_data", &format!("{t}_train.jsonl")).map_err(|_| {
                CliError::Contract(
                    "--show flags commands unseen in training: give --train-data or out_dir"
                        .into(),
                )
            })?;
        let (_, train_points) = load_jsonl(&train_path)?;
        let seen = seen_command_set(&train_points);
        let tag = |c: &String| if seen.contains(c) { c.clone() } else { format!("{c}*") };
        println!("(* = command never occurs in the training split)");
        for (point, pred) in points.iter().zip(&preds) {
            match entity_of(point) {
                Some(e) => println!("{} [{e}]", point.state_id),
                None => println!("{}", point.state_id),
            }
            let join = |cmds: &[String]| cmds.iter().map(&tag).collect::<Vec<_>>().join(" | ");
            println!("  gold: {}", join(&point.commands));
            println!("  pred: {}", join(&pred.commands));
        }
    }
    Ok(())
}

/// Architecture named in the settings, for deriving file names.
pub fn settings_arch(s: &Settings, missing: &str) -> Result<Arch, CliError> {
    let name = s.raw("arch").ok_or_else(|| CliError::Contract(missing.into()))?;
    Arch::parse(name).ok_or_else(|| {
        CliError::Contract(format!(
            "unknown architecture {name:?}: expected ps_bs, hred_ps, or ps_cat"
        ))
    })
}
