//! `cmdgen eval` — join a predictions file with its gold dataset and
//! score the predicted sets, writing a JSON report, a plain-text table,
//! and a by-gold-size breakdown CSV.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use clap::Args;
use cmdgen_core::eval::{aggregate, length_breakdown, length_breakdown_csv, render_report, EvalPoint};
use cmdgen_core::textcorpus::{load_jsonl, seen_command_set};

use crate::predict::{entity_of, settings_arch, PredLine};
use crate::settings::{io_err, text_header, CliError, Settings};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Manifest file with key=value settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory derived file names hang off.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Predictions file written by `cmdgen predict`.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Gold dataset the predictions are scored against.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Training split, defining which gold commands count as seen.
    #[arg(long)]
    train_data: Option<PathBuf>,
    /// Architecture tag, used only to derive file names when --pred is
    /// not given explicitly.
    #[arg(long)]
    arch: Option<String>,
    /// Task the dataset files belong to (acg or acge).
    #[arg(long)]
    task: Option<String>,
    /// Output files are written as <prefix>.json/.txt/.lengths.csv.
    #[arg(long)]
    report_prefix: Option<PathBuf>,
}

fn key_str(key: &(String, Option<String>)) -> String {
    match &key.1 {
        Some(e) => format!("{}[{e}]", key.0),
        None => key.0.clone(),
    }
}

fn list_sample(keys: &[String]) -> String {
    let sample: Vec<&str> = keys.iter().take(10).map(String::as_str).collect();
    let mut out = sample.join(", ");
    if keys.len() > sample.len() {
        out.push_str(&format!(" (+{} more)", keys.len() - sample.len()));
    }
    out
}

pub fn run(args: EvalArgs) -> Result<(), CliError> {
    let mut s = Settings::load(args.config.as_deref())?;
    s.set("out_dir", args.out_dir.map(|p| p.display().to_string()));
    s.set("predictions", args.pred.map(|p| p.display().to_string()));
    s.set("data", args.gold.map(|p| p.display().to_string()));
    s.set("train_data", args.train_data.map(|p| p.display().to_string()));
    s.set("arch", args.arch);
    s.set("task", args.task);
    s.set("report_prefix", args.report_prefix.map(|p| p.display().to_string()));

    let t = s.task()?.as_str();
    let pred_path = match s.path("predictions") {
        Some(p) => p,
        None => {
            let arch = settings_arch(&s, "no predictions file: set --pred, or --arch + out_dir")?;
            s.path_or_derived("predictions", &format!("{arch}_{t}.pred.jsonl"))?
        }
    };
    let gold_path = s.path_or_derived("data", &format!("{t}_test.jsonl"))?;
    let train_path = s.path_or_derived("train_data", &format!("{t}_train.jsonl"))?;

    let text = std::fs::read_to_string(&pred_path).map_err(|e| io_err(&pred_path, e))?;
    let mut preds: BTreeMap<(String, Option<String>), Vec<String>> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (idx == 0 && line.contains("\"_meta\"")) {
            continue;
        }
        let at = format!("{}:{}", pred_path.display(), idx + 1);
        let p: PredLine = serde_json::from_str(line)
            .map_err(|e| CliError::Contract(format!("{at}: malformed prediction: {e}")))?;
        let key = (p.state_id, p.entity);
        if preds.insert(key.clone(), p.predicted).is_some() {
            return Err(CliError::Contract(format!(
                "{at}: duplicate prediction for {}",
                key_str(&key)
            )));
        }
    }

    let (gold_meta, gold_points) = load_jsonl(&gold_path)?;
    let (_, train_points) = load_jsonl(&train_path)?;

    let mut eval_points = Vec::with_capacity(gold_points.len());
    let mut unmatched_gold = Vec::new();
    let mut gold_keys = HashSet::new();
    for g in &gold_points {
        let key = (g.state_id.clone(), entity_of(g));
        if !gold_keys.insert(key.clone()) {
            return Err(CliError::Contract(format!(
                "{}: duplicate gold point {}",
                gold_path.display(),
                key_str(&key)
            )));
        }
        match preds.remove(&key) {
            Some(pred) => eval_points.push(EvalPoint { pred, gold: g.commands.clone() }),
            None => unmatched_gold.push(key_str(&key)),
        }
    }
    let unmatched_pred: Vec<String> = preds.keys().map(key_str).collect();
    if !unmatched_gold.is_empty() || !unmatched_pred.is_empty() {
        let mut parts = Vec::new();
        if !unmatched_gold.is_empty() {
            parts.push(format!(
                "{} gold point(s) without a prediction: {}",
                unmatched_gold.len(),
                list_sample(&unmatched_gold)
            ));
        }
        if !unmatched_pred.is_empty() {
            parts.push(format!(
                "{} prediction(s) without a gold point: {}",
                unmatched_pred.len(),
                list_sample(&unmatched_pred)
            ));
        }
        return Err(CliError::Contract(format!("join failed: {}", parts.join("; "))));
    }

    let seen: HashSet<String> = seen_command_set(&train_points).into_iter().collect();
    let report = aggregate(&eval_points, &seen);
    let rows = length_breakdown(&eval_points);
    let meta = s.meta(gold_meta.and_then(|m| m.seed));

    let prefix = match s.path("report_prefix") {
        Some(p) => p,
        // ps_cat_acg.pred.jsonl → ps_cat_acg.report
        None => pred_path.with_extension("").with_extension("report"),
    };
    let json_path = PathBuf::from(format!("{}.json", prefix.display()));
    let txt_path = PathBuf::from(format!("{}.txt", prefix.display()));
    let csv_path = PathBuf::from(format!("{}.lengths.csv", prefix.display()));

    let body = serde_json::json!({
        "_meta": meta,
        "report": report,
        "length_breakdown": rows,
    });
    let json = serde_json::to_string_pretty(&body).expect("reports always serialize");
    std::fs::write(&json_path, json + "\n").map_err(|e| io_err(&json_path, e))?;

    let table = render_report(&report);
    let txt = format!("{}\n{table}", text_header(&meta));
    std::fs::write(&txt_path, &txt).map_err(|e| io_err(&txt_path, e))?;

    let csv = format!("{}\n{}", text_header(&meta), length_breakdown_csv(&rows));
    std::fs::write(&csv_path, csv).map_err(|e| io_err(&csv_path, e))?;

    print!("{txt}");
    println!("reports: {} {} {}", json_path.display(), txt_path.display(), csv_path.display());
    Ok(())
}
