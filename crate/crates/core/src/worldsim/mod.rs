//! Deterministic mini text-adventure engine.
//!
//! A [`GameState`] is a set of rooms connected by (possibly doored) exits,
//! plus objects that sit on the floor, on supporters, inside containers, or
//! in the player's inventory.  Eleven verbs mutate state; a command is
//! *admissible* in a state exactly when applying it would change the state.
//! [`admissible_commands`] enumerates that set constructively, and the test
//! suites cross-check it against brute force: every grammar-well-formed
//! command over the state's entities pushed through [`apply`].
//!
//! Everything is pure and seed-deterministic: world generation, walkthrough
//! sampling, rendering, and dataset emission never consult global state.

mod command;
mod config;
mod corpus;
mod emit;
mod engine;
mod gen;
mod render;
mod state;

pub use command::{Command, Verb};
pub use config::{Lexicon, WorldConfig};
pub use corpus::{generate_corpus, Corpus, CorpusConfig};
pub use emit::{emit_game_points, walkthrough};
pub use engine::{admissible_by_brute_force, admissible_commands, apply, command_universe, GrammarError};
pub use gen::generate_world;
pub use render::render_context;
pub use state::{Dir, Door, DoorId, GameState, Kind, Obj, ObjId, Place, Room, RoomId};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
}
