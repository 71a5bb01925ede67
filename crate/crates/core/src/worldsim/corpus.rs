//! Whole-corpus generation: many games, split into train/valid/test by
//! game so evaluation games are never seen during training.

use crate::rng::Rng;
use crate::textcorpus::{DataPoint, Task};

use super::config::{Lexicon, WorldConfig};
use super::emit::{emit_game_points, walkthrough};
use super::gen::generate_world;
use super::WorldError;

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    pub world: WorldConfig,
    pub games: usize,
    pub train_frac: f64,
    pub valid_frac: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            world: WorldConfig::default(),
            games: 100,
            train_frac: 0.8,
            valid_frac: 0.1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub train: Vec<DataPoint>,
    pub valid: Vec<DataPoint>,
    pub test: Vec<DataPoint>,
}

impl Corpus {
    pub fn splits(&self) -> [(&'static str, &[DataPoint]); 3] {
        [("train", &self.train), ("valid", &self.valid), ("test", &self.test)]
    }
}

/// Generate `cfg.games` games and split them.  Game `g` draws from its
/// own child stream of the master seed, so any one game can be reproduced
/// without generating the ones before it.
pub fn generate_corpus(cfg: &CorpusConfig, task: Task) -> Result<Corpus, WorldError> {
    let lex = Lexicon::default();
    cfg.world.validate(&lex)?;
    if cfg.games < 3 {
        return Err(WorldError::InvalidConfig(format!(
            "{} games cannot fill three splits",
            cfg.games
        )));
    }
    if !(0.0..1.0).contains(&cfg.train_frac)
        || !(0.0..1.0).contains(&cfg.valid_frac)
        || cfg.train_frac + cfg.valid_frac >= 1.0
        || cfg.train_frac <= 0.0
        || cfg.valid_frac <= 0.0
    {
        return Err(WorldError::InvalidConfig(format!(
            "splits train={} valid={} must be positive and sum below 1",
            cfg.train_frac, cfg.valid_frac
        )));
    }

    let master = Rng::new(cfg.seed);

    // Stream 0 assigns games to splits; game g uses stream g + 1.
    let mut order: Vec<usize> = (0..cfg.games).collect();
    master.split(0).shuffle(&mut order);
    let mut n_train = (cfg.games as f64 * cfg.train_frac).round() as usize;
    let mut n_valid = (cfg.games as f64 * cfg.valid_frac).round() as usize;
    n_train = n_train.clamp(1, cfg.games - 2);
    n_valid = n_valid.clamp(1, cfg.games - n_train - 1);

    let mut corpus = Corpus { train: Vec::new(), valid: Vec::new(), test: Vec::new() };
    for (rank, &g) in order.iter().enumerate() {
        let mut grng = master.split(g as u64 + 1);
        let world = generate_world(&cfg.world, &lex, &mut grng);
        let states = walkthrough(&world, cfg.world.walkthrough_len, &mut grng);
        let points = emit_game_points(&format!("g{g:04}"), &states, task);
        let sink = if rank < n_train {
            &mut corpus.train
        } else if rank < n_train + n_valid {
            &mut corpus.valid
        } else {
            &mut corpus.test
        };
        sink.extend(points);
    }
    // Points arrive in split-assignment order; sort by id so the output
    // does not depend on how the shuffle interleaved the splits.
    for split in [&mut corpus.train, &mut corpus.valid, &mut corpus.test] {
        split.sort_by(|a, b| {
            (&a.game_id, &a.state_id, a.entities.first().map(|e| e.start))
                .cmp(&(&b.game_id, &b.state_id, b.entities.first().map(|e| e.start)))
        });
    }
    Ok(corpus)
}
