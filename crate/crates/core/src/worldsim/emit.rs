//! Turns simulated play into labeled data points.
//!
//! A walkthrough random-walks the game through admissible commands and
//! collects distinct states.  Each state becomes either one point labeled
//! with every admissible command, or one point per mentioned entity
//! labeled with the admissible commands about that entity (so the
//! per-entity points of a state partition its full command set).

use std::collections::HashSet;

use crate::rng::Rng;
use crate::textcorpus::{DataPoint, EntitySpan, Task};

use super::engine::{admissible_commands, apply};
use super::render::render_context;
use super::state::GameState;

/// Random-walk from `start`, recording up to `target_states` distinct
/// states (the start state included).  Revisited states are passed
/// through but not recorded twice; the walk gives up after a bounded
/// number of steps so loops cannot hang it.
pub fn walkthrough(start: &GameState, target_states: usize, rng: &mut Rng) -> Vec<GameState> {
    let mut states = vec![start.clone()];
    let mut seen = HashSet::from([start.fingerprint()]);
    let mut current = start.clone();
    let mut budget = target_states.saturating_mul(8);
    while states.len() < target_states && budget > 0 {
        budget -= 1;
        let options = admissible_commands(&current);
        if options.is_empty() {
            break;
        }
        let cmd = rng.pick(&options).clone();
        let (next, changed) = apply(&current, &cmd).expect("admissible commands are grammatical");
        debug_assert!(changed, "admissible command {cmd} changed nothing");
        current = next;
        if seen.insert(current.fingerprint()) {
            states.push(current.clone());
        }
    }
    states
}

/// First occurrence of `name`'s tokens as a contiguous window in
/// `context`; inclusive bounds.
fn find_span(context: &[String], name: &str) -> Option<(usize, usize)> {
    let want: Vec<&str> = name.split(' ').collect();
    if want.is_empty() || context.len() < want.len() {
        return None;
    }
    (0..=context.len() - want.len())
        .find(|&s| context[s..s + want.len()].iter().map(String::as_str).eq(want.iter().copied()))
        .map(|s| (s, s + want.len() - 1))
}

/// Every entity a command could be about in this state, in order of first
/// mention: visible objects, adjacent doors, carried objects, and the
/// directions of the room's exits.
fn mentioned_entities(state: &GameState, context: &[String]) -> Vec<EntitySpan> {
    let mut names: Vec<String> = Vec::new();
    for i in state.visible_objects() {
        names.push(state.obj(i).name.clone());
    }
    for d in state.adjacent_doors() {
        names.push(state.door(d).name.clone());
    }
    for i in state.inventory() {
        names.push(state.obj(i).name.clone());
    }
    for &dir in state.room(state.player).exits.keys() {
        names.push(dir.as_str().to_string());
    }
    let mut spans: Vec<EntitySpan> = names
        .into_iter()
        .map(|name| {
            let (start, end) = find_span(context, &name)
                .unwrap_or_else(|| panic!("entity {name:?} is not mentioned in the context"));
            EntitySpan { name, start, end }
        })
        .collect();
    spans.sort_by_key(|s| s.start);
    spans
}

/// Label every state of a game.  For [`Task::Acg`] each state yields one
/// point carrying all admissible commands; for [`Task::Acge`] each state
/// yields one point per mentioned entity carrying only the commands whose
/// first argument is that entity.
pub fn emit_game_points(game_id: &str, states: &[GameState], task: Task) -> Vec<DataPoint> {
    let mut points = Vec::new();
    for (idx, state) in states.iter().enumerate() {
        let context = render_context(state);
        let commands = admissible_commands(state);
        let entities = mentioned_entities(state, &context);
        let state_id = format!("{game_id}_s{idx:03}");
        match task {
            Task::Acg => {
                points.push(DataPoint {
                    game_id: game_id.to_string(),
                    state_id,
                    context: context.clone(),
                    entities,
                    commands: commands.iter().map(|c| c.to_string()).collect(),
                    task,
                });
            }
            Task::Acge => {
                for entity in entities {
                    let about: Vec<String> = commands
                        .iter()
                        .filter(|c| c.primary_entity() == entity.name)
                        .map(|c| c.to_string())
                        .collect();
                    points.push(DataPoint {
                        game_id: game_id.to_string(),
                        state_id: state_id.clone(),
                        context: context.clone(),
                        entities: vec![entity],
                        commands: about,
                        task,
                    });
                }
            }
        }
    }
    for p in &points {
        p.validate().expect("emitted point must be well formed");
    }
    points
}
