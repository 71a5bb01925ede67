//! `cmdgen stats` — summarize dataset splits: sizes, commands per point,
//! and how much of the command pool is unseen relative to training.

use std::path::PathBuf;

use clap::Args;
use cmdgen_core::textcorpus::{
    compute_stats, load_jsonl, seen_command_set, DataPoint, SplitStats,
};

use crate::settings::{text_header, CliError, Settings};

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Manifest file with key=value settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory derived file names hang off.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Training split (defines the seen-command pool).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Validation split.
    #[arg(long)]
    valid: Option<PathBuf>,
    /// Test split.
    #[arg(long)]
    test: Option<PathBuf>,
}

fn row(name: &str, st: &SplitStats) -> String {
    let spread = format!("{:.2} ± {:.2}", st.mean_commands, st.std_commands);
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
    format!(
        "{:<6} {:>8} {:>9} {:>16} {:>7} {:>7} {:>12}\n",
        name,
        st.points,
        st.command_instances,
        spread,
        st.unique_commands,
        opt(st.unseen_instances),
        opt(st.unseen_unique),
    )
}

/// Render one row per split plus a union row.  When a `train` split is
/// present its command pool defines which commands count as unseen in
/// the other rows; instance counts are additive, so the union row's
/// points, commands, and unseen columns equal the per-split sums.
pub fn split_table(rows: &[(&str, &[DataPoint])]) -> String {
    let seen = rows.iter().find(|(n, _)| *n == "train").map(|(_, ps)| seen_command_set(ps));
    let mut out = format!(
        "{:<6} {:>8} {:>9} {:>16} {:>7} {:>7} {:>12}\n",
        "split", "points", "commands", "mean±std", "unique", "unseen", "unseen-uniq"
    );
    let mut union: Vec<DataPoint> = Vec::new();
    for (name, points) in rows {
        out.push_str(&row(name, &compute_stats(points, seen.as_ref())));
        union.extend_from_slice(points);
    }
    if rows.len() > 1 {
        out.push_str(&row("all", &compute_stats(&union, seen.as_ref())));
    }
    out
}

pub fn run(args: StatsArgs) -> Result<(), CliError> {
    let mut s = Settings::load(args.config.as_deref())?;
    s.set("out_dir", args.out_dir.map(|p| p.display().to_string()));
    s.set("train_data", args.train.map(|p| p.display().to_string()));
    s.set("valid_data", args.valid.map(|p| p.display().to_string()));
    s.set("data", args.test.map(|p| p.display().to_string()));
    let t = s.task()?.as_str();

    let resolve = |key: &str, file: String| -> Option<PathBuf> {
        s.path(key).or_else(|| s.path("out_dir").map(|d| d.join(file)))
    };
    let splits = [
        ("train", resolve("train_data", format!("{t}_train.jsonl"))),
        ("valid", resolve("valid_data", format!("{t}_valid.jsonl"))),
        ("test", resolve("data", format!("{t}_test.jsonl"))),
    ];
    if splits.iter().all(|(_, p)| p.is_none()) {
        return Err(CliError::Contract(
            "nothing to summarize: give --train/--valid/--test or out_dir".into(),
        ));
    }

    let mut seed = None;
    let mut loaded: Vec<(&str, Vec<DataPoint>)> = Vec::new();
    for (name, path) in splits {
        if let Some(path) = path {
            let (meta, points) = load_jsonl(&path)?;
            seed = seed.or(meta.and_then(|m| m.seed));
            loaded.push((name, points));
        }
    }
    let rows: Vec<(&str, &[DataPoint])> =
        loaded.iter().map(|(n, ps)| (*n, ps.as_slice())).collect();

    println!("{}", text_header(&s.meta(seed)));
    println!("task: {t}");
    print!("{}", split_table(&rows));
    Ok(())
}
