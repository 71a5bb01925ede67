//! Random world construction.
//!
//! Rooms are laid out as a tree on an integer grid so exits are mutually
//! consistent; connections may get doors, containers may start locked,
//! and every lock gets exactly one matching key named with the lock's own
//! adjective ("iron door" is operated by the "iron key").  Each named
//! thing in a game uses a distinct adjective, which keeps names unique.

use std::collections::{BTreeMap, HashSet};

use crate::rng::Rng;

use super::config::{Lexicon, WorldConfig};
use super::state::{Dir, Door, DoorId, Exit, GameState, Kind, Obj, ObjId, Place, Room, RoomId};

fn step(cell: (i32, i32), dir: Dir) -> (i32, i32) {
    match dir {
        Dir::North => (cell.0, cell.1 + 1),
        Dir::East => (cell.0 + 1, cell.1),
        Dir::South => (cell.0, cell.1 - 1),
        Dir::West => (cell.0 - 1, cell.1),
    }
}

/// Build a world from `rng`.  The caller is expected to have validated
/// `cfg` against `lex`; this function panics on impossible configurations
/// and always returns a state satisfying `check_invariants`.
pub fn generate_world(cfg: &WorldConfig, lex: &Lexicon, rng: &mut Rng) -> GameState {
    let mut adjectives = lex.adjectives.clone();
    rng.shuffle(&mut adjectives);
    let mut next_adjective = 0usize;
    let mut fresh_adjective = || {
        let a = adjectives[next_adjective];
        next_adjective += 1;
        a
    };

    let n_rooms = rng.range(cfg.rooms.0, cfg.rooms.1);
    let mut room_names = lex.room_names.clone();
    rng.shuffle(&mut room_names);

    let mut rooms: Vec<Room> =
        vec![Room { name: room_names[0].to_string(), exits: BTreeMap::new() }];
    let mut cells: Vec<(i32, i32)> = vec![(0, 0)];
    let mut occupied: HashSet<(i32, i32)> = HashSet::from([(0, 0)]);
    let mut edges: Vec<(RoomId, RoomId, Dir)> = Vec::new();

    for i in 1..n_rooms {
        let mut slots: Vec<(usize, Dir, (i32, i32))> = Vec::new();
        for (r, &cell) in cells.iter().enumerate() {
            for dir in Dir::ALL {
                let target = step(cell, dir);
                if !rooms[r].exits.contains_key(&dir) && !occupied.contains(&target) {
                    slots.push((r, dir, target));
                }
            }
        }
        let &(parent, dir, cell) = rng.pick(&slots);
        rooms.push(Room { name: room_names[i].to_string(), exits: BTreeMap::new() });
        cells.push(cell);
        occupied.insert(cell);
        rooms[parent].exits.insert(dir, Exit { to: RoomId(i), door: None });
        rooms[i].exits.insert(dir.opposite(), Exit { to: RoomId(parent), door: None });
        edges.push((RoomId(parent), RoomId(i), dir));
    }

    let mut doors: Vec<Door> = Vec::new();
    for &(a, b, dir) in &edges {
        if !rng.chance(cfg.door_prob) {
            continue;
        }
        let locked = rng.chance(cfg.door_locked_prob);
        let open = if locked { false } else { !rng.chance(cfg.door_closed_prob) };
        let id = DoorId(doors.len());
        doors.push(Door {
            name: format!("{} {}", fresh_adjective(), rng.pick(&lex.door_nouns)),
            open,
            lockable: locked,
            locked,
            key: None,
            rooms: (a, b),
        });
        rooms[a.0].exits.get_mut(&dir).unwrap().door = Some(id);
        rooms[b.0].exits.get_mut(&dir.opposite()).unwrap().door = Some(id);
    }

    let mut objects: Vec<Obj> = Vec::new();
    for r in 0..n_rooms {
        let count = rng.range(cfg.objects_per_room.0, cfg.objects_per_room.1);
        let mut kinds: Vec<Kind> = (0..count)
            .map(|_| match rng.next_f64() {
                x if x < 0.25 => Kind::Container,
                x if x < 0.50 => Kind::Supporter,
                x if x < 0.80 => Kind::Portable,
                _ => Kind::Food,
            })
            .collect();
        // Holders first so carryables can be nested into them.
        kinds.sort_by_key(|k| k.carryable());

        let room_start = objects.len();
        for kind in kinds {
            let noun = match kind {
                Kind::Container => rng.pick(&lex.container_nouns),
                Kind::Supporter => rng.pick(&lex.supporter_nouns),
                Kind::Portable => rng.pick(&lex.portable_nouns),
                Kind::Food => rng.pick(&lex.food_nouns),
                Kind::Key => unreachable!("keys are created per lock"),
            };
            let name = format!("{} {}", fresh_adjective(), noun);
            let mut obj = Obj {
                name,
                kind,
                openable: false,
                open: false,
                lockable: false,
                locked: false,
                key: None,
                place: Place::Room(RoomId(r)),
            };
            if kind == Kind::Container {
                obj.openable = true;
                obj.locked = rng.chance(cfg.container_locked_prob);
                obj.lockable = obj.locked;
                obj.open = if obj.locked { false } else { !rng.chance(cfg.container_closed_prob) };
            }
            if kind.carryable() && rng.chance(cfg.carryable_nested_prob) {
                let holders: Vec<usize> = (room_start..objects.len())
                    .filter(|&i| !objects[i].kind.carryable())
                    .collect();
                if !holders.is_empty() {
                    let h = *rng.pick(&holders);
                    obj.place = match objects[h].kind {
                        Kind::Supporter => Place::On(ObjId(h)),
                        Kind::Container => Place::In(ObjId(h)),
                        _ => unreachable!(),
                    };
                }
            }
            objects.push(obj);
        }
    }

    // One key per lock, named after the lock; placed somewhere reachable
    // by plain exploration (a floor, a supporter, or the player's hands).
    let supporters: Vec<usize> =
        (0..objects.len()).filter(|&i| objects[i].kind == Kind::Supporter).collect();
    let locked_doors: Vec<usize> = (0..doors.len()).filter(|&d| doors[d].locked).collect();
    let locked_objects: Vec<usize> = (0..objects.len()).filter(|&o| objects[o].locked).collect();
    for (is_door, lock) in locked_doors
        .iter()
        .map(|&d| (true, d))
        .chain(locked_objects.iter().map(|&o| (false, o)))
    {
        let lock_name = if is_door { &doors[lock].name } else { &objects[lock].name };
        let adjective = lock_name.split(' ').next().unwrap().to_string();
        let place = if rng.chance(cfg.key_in_inventory_prob) {
            Place::Inventory
        } else if !supporters.is_empty() && rng.chance(0.5) {
            Place::On(ObjId(*rng.pick(&supporters)))
        } else {
            Place::Room(RoomId(rng.below(n_rooms)))
        };
        let key_id = ObjId(objects.len());
        objects.push(Obj {
            name: format!("{} {}", adjective, rng.pick(&lex.key_nouns)),
            kind: Kind::Key,
            openable: false,
            open: false,
            lockable: false,
            locked: false,
            key: None,
            place,
        });
        if is_door {
            doors[lock].key = Some(key_id);
        } else {
            objects[lock].key = Some(key_id);
        }
    }

    let state = GameState { rooms, doors, objects, player: RoomId(0) };
    state.check_invariants().expect("generated world violates invariants");
    state
}
