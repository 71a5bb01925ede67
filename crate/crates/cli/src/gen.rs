//! `cmdgen gen` — generate a corpus of games and write dataset splits
//! for both tasks, plus a summary table.

use std::path::PathBuf;

use clap::Args;
use cmdgen_core::textcorpus::{save_jsonl, Task};
use cmdgen_core::worldsim::{generate_corpus, CorpusConfig, WorldConfig};

use crate::settings::{io_err, text_header, CliError, Settings};
use crate::stats::split_table;

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Manifest file with key=value settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory the dataset files are written into.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of games to generate.
    #[arg(long)]
    games: Option<usize>,
    /// Master seed; every artifact records it.
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of games in the training split.
    #[arg(long)]
    train_frac: Option<f64>,
    /// Fraction of games in the validation split.
    #[arg(long)]
    valid_frac: Option<f64>,
    /// Fraction of games in the test split.
    #[arg(long)]
    test_frac: Option<f64>,
    /// Smallest number of rooms per game.
    #[arg(long)]
    rooms_min: Option<usize>,
    /// Largest number of rooms per game.
    #[arg(long)]
    rooms_max: Option<usize>,
    /// Smallest number of objects per room.
    #[arg(long)]
    objects_min: Option<usize>,
    /// Largest number of objects per room.
    #[arg(long)]
    objects_max: Option<usize>,
    /// Distinct states collected per game.
    #[arg(long)]
    walkthrough_len: Option<usize>,
}

pub fn run(args: GenArgs) -> Result<(), CliError> {
    let mut s = Settings::load(args.config.as_deref())?;
    s.set("out_dir", args.out_dir.map(|p| p.display().to_string()));
    s.set("games", args.games);
    s.set("seed", args.seed);
    s.set("train_frac", args.train_frac);
    s.set("valid_frac", args.valid_frac);
    s.set("test_frac", args.test_frac);
    s.set("rooms_min", args.rooms_min);
    s.set("rooms_max", args.rooms_max);
    s.set("objects_min", args.objects_min);
    s.set("objects_max", args.objects_max);
    s.set("walkthrough_len", args.walkthrough_len);

    let out_dir = s
        .path("out_dir")
        .ok_or_else(|| CliError::Contract("no output directory: set --out-dir or out_dir".into()))?;

    let d = WorldConfig::default();
    let world = WorldConfig {
        rooms: (s.get_or("rooms_min", d.rooms.0)?, s.get_or("rooms_max", d.rooms.1)?),
        objects_per_room: (
            s.get_or("objects_min", d.objects_per_room.0)?,
            s.get_or("objects_max", d.objects_per_room.1)?,
        ),
        door_prob: s.get_or("door_prob", d.door_prob)?,
        door_locked_prob: s.get_or("door_locked_prob", d.door_locked_prob)?,
        door_closed_prob: s.get_or("door_closed_prob", d.door_closed_prob)?,
        container_locked_prob: s.get_or("container_locked_prob", d.container_locked_prob)?,
        container_closed_prob: s.get_or("container_closed_prob", d.container_closed_prob)?,
        carryable_nested_prob: s.get_or("carryable_nested_prob", d.carryable_nested_prob)?,
        key_in_inventory_prob: s.get_or("key_in_inventory_prob", d.key_in_inventory_prob)?,
        walkthrough_len: s.get_or("walkthrough_len", d.walkthrough_len)?,
    };

    let dc = CorpusConfig::default();
    let train_frac = s.get_or("train_frac", dc.train_frac)?;
    let valid_frac = s.get_or("valid_frac", dc.valid_frac)?;
    let test_frac = s.get_or("test_frac", 1.0 - dc.train_frac - dc.valid_frac)?;
    let total = train_frac + valid_frac + test_frac;
    if (total - 1.0).abs() > 1e-9 {
        return Err(CliError::Contract(format!(
            "split fractions {train_frac} + {valid_frac} + {test_frac} = {total}, not 1"
        )));
    }

    let seed = s.get_or("seed", dc.seed)?;
    let cfg = CorpusConfig {
        world,
        games: s.get_or("games", dc.games)?,
        train_frac,
        valid_frac,
        seed,
    };

    std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
    let meta = s.meta(Some(seed));
    let mut table = text_header(&meta);
    let mut written = Vec::new();
    for task in [Task::Acg, Task::Acge] {
        let corpus = generate_corpus(&cfg, task)?;
        for (name, points) in corpus.splits() {
            let path = out_dir.join(format!("{}_{}.jsonl", task.as_str(), name));
            save_jsonl(&path, Some(&meta), points)?;
            written.push(path);
        }
        table.push_str(&format!("\n\ntask: {}\n", task.as_str()));
        table.push_str(&split_table(&corpus.splits()));
    }
    table.push('\n');

    let stats_path = out_dir.join("stats.txt");
    std::fs::write(&stats_path, &table).map_err(|e| io_err(&stats_path, e))?;
    written.push(stats_path);

    println!("wrote {} files to {}", written.len(), out_dir.display());
    Ok(())
}
