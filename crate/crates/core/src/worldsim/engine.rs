//! Command semantics: `apply` executes one command on a state, and
//! `admissible_commands` enumerates exactly the commands that change the
//! state.  `command_universe` lists every grammatical command over the
//! game's entities so the constructive enumeration can be cross-checked
//! by brute force.

use thiserror::Error;

use super::command::{Command, Verb};
use super::state::{Dir, DoorId, GameState, Kind, ObjId, Place};

/// A command that is not even grammatical, as opposed to one that is
/// well-formed but has no effect.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("{verb:?} takes {expected} argument(s), got {got}")]
    Arity { verb: Verb, expected: usize, got: usize },
    #[error("{0:?} is not a direction")]
    NotADirection(String),
    #[error("{0:?} is a direction, not a thing")]
    DirectionAsEntity(String),
}

fn visible_by_name(state: &GameState, name: &str) -> Option<ObjId> {
    state.visible_objects().into_iter().find(|&i| state.obj(i).name == name)
}

fn inventory_by_name(state: &GameState, name: &str) -> Option<ObjId> {
    state.inventory().into_iter().find(|&i| state.obj(i).name == name)
}

fn adjacent_door_by_name(state: &GameState, name: &str) -> Option<DoorId> {
    state.adjacent_doors().into_iter().find(|&d| state.door(d).name == name)
}

/// Does the player hold the key that operates this lock?
fn held_key(state: &GameState, key: Option<ObjId>, key_name: &str) -> bool {
    match key {
        Some(k) => state.obj(k).name == key_name && state.obj(k).place == Place::Inventory,
        None => false,
    }
}

/// Execute `cmd` on a copy of `state`.  Returns the successor state and
/// whether anything changed.  Ill-formed commands (wrong arity, direction
/// words in entity slots and vice versa) are grammar errors; well-formed
/// commands that name nothing reachable or fail a precondition return the
/// state unchanged with `false`.
pub fn apply(state: &GameState, cmd: &Command) -> Result<(GameState, bool), GrammarError> {
    let expected = cmd.verb.arity();
    if cmd.args.len() != expected {
        return Err(GrammarError::Arity { verb: cmd.verb, expected, got: cmd.args.len() });
    }
    if cmd.verb == Verb::Go {
        if Dir::parse(&cmd.args[0]).is_none() {
            return Err(GrammarError::NotADirection(cmd.args[0].clone()));
        }
    } else {
        for a in &cmd.args {
            if Dir::parse(a).is_some() {
                return Err(GrammarError::DirectionAsEntity(a.clone()));
            }
        }
    }

    let mut next = state.clone();
    let changed = match cmd.verb {
        Verb::Go => {
            let dir = Dir::parse(&cmd.args[0]).unwrap();
            match state.room(state.player).exits.get(&dir) {
                Some(exit) if exit.door.is_none_or(|d| state.door(d).open) => {
                    next.player = exit.to;
                    true
                }
                _ => false,
            }
        }
        Verb::Open => {
            if let Some(i) = visible_by_name(state, &cmd.args[0]) {
                let o = state.obj(i);
                if o.openable && !o.open && !o.locked {
                    next.objects[i.0].open = true;
                    true
                } else {
                    false
                }
            } else if let Some(d) = adjacent_door_by_name(state, &cmd.args[0]) {
                let door = state.door(d);
                if !door.open && !door.locked {
                    next.doors[d.0].open = true;
                    true
                } else {
                    false
                }
            } else {
                false
            }
        }
        Verb::Close => {
            if let Some(i) = visible_by_name(state, &cmd.args[0]) {
                if state.obj(i).open {
                    next.objects[i.0].open = false;
                    true
                } else {
                    false
                }
            } else if let Some(d) = adjacent_door_by_name(state, &cmd.args[0]) {
                if state.door(d).open {
                    next.doors[d.0].open = false;
                    true
                } else {
                    false
                }
            } else {
                false
            }
        }
        Verb::Take => match visible_by_name(state, &cmd.args[0]) {
            Some(i)
                if state.obj(i).place == Place::Room(state.player)
                    && state.obj(i).kind.carryable() =>
            {
                next.objects[i.0].place = Place::Inventory;
                true
            }
            _ => false,
        },
        Verb::TakeFrom => {
            let x = visible_by_name(state, &cmd.args[0]);
            let y = visible_by_name(state, &cmd.args[1]);
            match (x, y) {
                (Some(x), Some(y))
                    if state.obj(x).kind.carryable()
                        && (state.obj(x).place == Place::On(y)
                            || state.obj(x).place == Place::In(y)) =>
                {
                    next.objects[x.0].place = Place::Inventory;
                    true
                }
                _ => false,
            }
        }
        Verb::Drop => match inventory_by_name(state, &cmd.args[0]) {
            Some(i) => {
                next.objects[i.0].place = Place::Room(state.player);
                true
            }
            None => false,
        },
        Verb::PutOn => {
            let x = inventory_by_name(state, &cmd.args[0]);
            let y = visible_by_name(state, &cmd.args[1]);
            match (x, y) {
                (Some(x), Some(y)) if state.obj(y).kind == Kind::Supporter => {
                    next.objects[x.0].place = Place::On(y);
                    true
                }
                _ => false,
            }
        }
        Verb::InsertInto => {
            let x = inventory_by_name(state, &cmd.args[0]);
            let y = visible_by_name(state, &cmd.args[1]);
            match (x, y) {
                (Some(x), Some(y))
                    if state.obj(y).kind == Kind::Container && state.obj(y).open =>
                {
                    next.objects[x.0].place = Place::In(y);
                    true
                }
                _ => false,
            }
        }
        Verb::Eat => match inventory_by_name(state, &cmd.args[0]) {
            Some(i) if state.obj(i).kind == Kind::Food => {
                next.objects[i.0].place = Place::Gone;
                true
            }
            _ => false,
        },
        Verb::Lock => {
            if let Some(i) = visible_by_name(state, &cmd.args[0]) {
                let o = state.obj(i);
                if o.lockable && !o.locked && !o.open && held_key(state, o.key, &cmd.args[1]) {
                    next.objects[i.0].locked = true;
                    true
                } else {
                    false
                }
            } else if let Some(d) = adjacent_door_by_name(state, &cmd.args[0]) {
                let door = state.door(d);
                if door.lockable
                    && !door.locked
                    && !door.open
                    && held_key(state, door.key, &cmd.args[1])
                {
                    next.doors[d.0].locked = true;
                    true
                } else {
                    false
                }
            } else {
                false
            }
        }
        Verb::Unlock => {
            if let Some(i) = visible_by_name(state, &cmd.args[0]) {
                let o = state.obj(i);
                if o.locked && held_key(state, o.key, &cmd.args[1]) {
                    next.objects[i.0].locked = false;
                    true
                } else {
                    false
                }
            } else if let Some(d) = adjacent_door_by_name(state, &cmd.args[0]) {
                let door = state.door(d);
                if door.locked && held_key(state, door.key, &cmd.args[1]) {
                    next.doors[d.0].locked = false;
                    true
                } else {
                    false
                }
            } else {
                false
            }
        }
    };
    Ok((next, changed))
}

/// All state-changing commands for `state`, built constructively and
/// sorted by their rendered text.  This must agree exactly with filtering
/// `command_universe` through `apply`.
pub fn admissible_commands(state: &GameState) -> Vec<Command> {
    let mut out = Vec::new();
    let name = |i: ObjId| state.obj(i).name.clone();

    for (&dir, exit) in &state.room(state.player).exits {
        if exit.door.is_none_or(|d| state.door(d).open) {
            out.push(Command::unary(Verb::Go, dir.as_str()));
        }
    }

    let key_in_hand = |key: Option<ObjId>| {
        key.filter(|&k| state.obj(k).place == Place::Inventory).map(|k| state.obj(k).name.clone())
    };

    for i in state.visible_objects() {
        let o = state.obj(i);
        if o.openable && !o.open && !o.locked {
            out.push(Command::unary(Verb::Open, name(i)));
        }
        if o.open {
            out.push(Command::unary(Verb::Close, name(i)));
        }
        if o.kind.carryable() {
            match o.place {
                Place::Room(_) => out.push(Command::unary(Verb::Take, name(i))),
                Place::On(h) | Place::In(h) => {
                    out.push(Command::binary(Verb::TakeFrom, name(i), name(h)));
                }
                _ => {}
            }
        }
        if o.lockable && !o.locked && !o.open {
            if let Some(k) = key_in_hand(o.key) {
                out.push(Command::binary(Verb::Lock, name(i), k));
            }
        }
        if o.locked {
            if let Some(k) = key_in_hand(o.key) {
                out.push(Command::binary(Verb::Unlock, name(i), k));
            }
        }
    }

    for d in state.adjacent_doors() {
        let door = state.door(d);
        if !door.open && !door.locked {
            out.push(Command::unary(Verb::Open, door.name.clone()));
        }
        if door.open {
            out.push(Command::unary(Verb::Close, door.name.clone()));
        }
        if door.lockable && !door.locked && !door.open {
            if let Some(k) = key_in_hand(door.key) {
                out.push(Command::binary(Verb::Lock, door.name.clone(), k));
            }
        }
        if door.locked {
            if let Some(k) = key_in_hand(door.key) {
                out.push(Command::binary(Verb::Unlock, door.name.clone(), k));
            }
        }
    }

    for i in state.inventory() {
        out.push(Command::unary(Verb::Drop, name(i)));
        if state.obj(i).kind == Kind::Food {
            out.push(Command::unary(Verb::Eat, name(i)));
        }
        for y in state.visible_objects() {
            let holder = state.obj(y);
            if holder.kind == Kind::Supporter {
                out.push(Command::binary(Verb::PutOn, name(i), name(y)));
            }
            if holder.kind == Kind::Container && holder.open {
                out.push(Command::binary(Verb::InsertInto, name(i), name(y)));
            }
        }
    }

    out.sort_by_key(|c| c.to_string());
    out
}

/// Every grammatical command over the game's entity names: `go` crossed
/// with the four directions, unary verbs crossed with every entity, and
/// binary verbs crossed with every ordered pair of distinct entities.
pub fn command_universe(state: &GameState) -> Vec<Command> {
    let mut names: Vec<&str> = state
        .objects
        .iter()
        .filter(|o| o.place != Place::Gone)
        .map(|o| o.name.as_str())
        .collect();
    names.extend(state.doors.iter().map(|d| d.name.as_str()));

    let mut out = Vec::new();
    for dir in Dir::ALL {
        out.push(Command::unary(Verb::Go, dir.as_str()));
    }
    for verb in [Verb::Open, Verb::Close, Verb::Take, Verb::Drop, Verb::Eat] {
        for &n in &names {
            out.push(Command::unary(verb, n));
        }
    }
    for verb in [Verb::TakeFrom, Verb::PutOn, Verb::InsertInto, Verb::Lock, Verb::Unlock] {
        for &a in &names {
            for &b in &names {
                if a != b {
                    out.push(Command::binary(verb, a, b));
                }
            }
        }
    }
    out
}

/// Brute-force admissible set: run every universe command through `apply`
/// and keep the ones that change the state.  Test oracle for
/// `admissible_commands`.
pub fn admissible_by_brute_force(state: &GameState) -> Vec<Command> {
    let mut out: Vec<Command> = command_universe(state)
        .into_iter()
        .filter(|c| apply(state, c).expect("universe commands are grammatical").1)
        .collect();
    out.sort_by_key(|c| c.to_string());
    out
}
