//! World state: rooms, doors, objects, and the player.

use std::collections::BTreeMap;

use crate::rng::fnv1a64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoomId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoorId(pub usize);

/// Compass directions, ordered north, east, south, west; that order is the
/// rendering and enumeration order everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    North,
    East,
    South,
    West,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::North, Dir::East, Dir::South, Dir::West];

    pub fn as_str(self) -> &'static str {
        match self {
            Dir::North => "north",
            Dir::East => "east",
            Dir::South => "south",
            Dir::West => "west",
        }
    }

    pub fn parse(word: &str) -> Option<Dir> {
        Dir::ALL.into_iter().find(|d| d.as_str() == word)
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::North => Dir::South,
            Dir::East => Dir::West,
            Dir::South => Dir::North,
            Dir::West => Dir::East,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exit {
    pub to: RoomId,
    pub door: Option<DoorId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Room {
    pub name: String,
    pub exits: BTreeMap<Dir, Exit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Container,
    Supporter,
    Portable,
    Food,
    Key,
}

impl Kind {
    /// Things the player can pick up.
    pub fn carryable(self) -> bool {
        matches!(self, Kind::Portable | Kind::Food | Kind::Key)
    }
}

/// Where an object currently is.  `Gone` marks consumed objects (eaten);
/// their slot stays so ids remain stable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Room(RoomId),
    In(ObjId),
    On(ObjId),
    Inventory,
    Gone,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obj {
    pub name: String,
    pub kind: Kind,
    pub openable: bool,
    pub open: bool,
    pub lockable: bool,
    pub locked: bool,
    /// The key object that locks/unlocks this one, if lockable.
    pub key: Option<ObjId>,
    pub place: Place,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Door {
    pub name: String,
    pub open: bool,
    pub lockable: bool,
    pub locked: bool,
    pub key: Option<ObjId>,
    /// The two rooms this door sits between.
    pub rooms: (RoomId, RoomId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameState {
    pub rooms: Vec<Room>,
    pub doors: Vec<Door>,
    pub objects: Vec<Obj>,
    pub player: RoomId,
}

impl GameState {
    pub fn room(&self, id: RoomId) -> &Room {
        &self.rooms[id.0]
    }

    pub fn obj(&self, id: ObjId) -> &Obj {
        &self.objects[id.0]
    }

    pub fn door(&self, id: DoorId) -> &Door {
        &self.doors[id.0]
    }

    /// Objects visible in the player's room: on the floor, on a floor
    /// supporter, or inside an *open* floor container.  Closed containers
    /// hide their contents.  Ascending id order.
    pub fn visible_objects(&self) -> Vec<ObjId> {
        let here = Place::Room(self.player);
        let mut out = Vec::new();
        for (i, o) in self.objects.iter().enumerate() {
            let id = ObjId(i);
            let visible = match o.place {
                p if p == here => true,
                Place::On(s) => self.objects[s.0].place == here,
                Place::In(c) => self.objects[c.0].place == here && self.objects[c.0].open,
                _ => false,
            };
            if visible {
                out.push(id);
            }
        }
        out
    }

    /// Inventory in ascending id order.
    pub fn inventory(&self) -> Vec<ObjId> {
        (0..self.objects.len())
            .map(ObjId)
            .filter(|&i| self.obj(i).place == Place::Inventory)
            .collect()
    }

    /// Doors on the player's room exits, in direction order.
    pub fn adjacent_doors(&self) -> Vec<DoorId> {
        self.room(self.player).exits.values().filter_map(|e| e.door).collect()
    }

    pub fn find_object(&self, name: &str) -> Option<ObjId> {
        self.objects
            .iter()
            .position(|o| o.name == name && o.place != Place::Gone)
            .map(ObjId)
    }

    pub fn find_door(&self, name: &str) -> Option<DoorId> {
        self.doors.iter().position(|d| d.name == name).map(DoorId)
    }

    /// Structural invariants; violated states indicate a generator or
    /// engine bug.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.player.0 >= self.rooms.len() {
            return Err("player in nonexistent room".into());
        }
        let mut names = std::collections::HashSet::new();
        for o in &self.objects {
            if o.place == Place::Gone {
                continue;
            }
            if !names.insert(o.name.as_str()) {
                return Err(format!("duplicate name {:?}", o.name));
            }
        }
        for d in &self.doors {
            if !names.insert(d.name.as_str()) {
                return Err(format!("duplicate name {:?}", d.name));
            }
            if d.locked && d.open {
                return Err(format!("door {:?} locked but open", d.name));
            }
            if d.locked && !d.lockable {
                return Err(format!("door {:?} locked but not lockable", d.name));
            }
            if d.lockable && d.key.is_none() {
                return Err(format!("door {:?} lockable without key", d.name));
            }
        }
        for o in &self.objects {
            if o.place == Place::Gone {
                continue;
            }
            if o.open && !o.openable {
                return Err(format!("{:?} open but not openable", o.name));
            }
            if o.locked && o.open {
                return Err(format!("{:?} locked but open", o.name));
            }
            if o.locked && !o.lockable {
                return Err(format!("{:?} locked but not lockable", o.name));
            }
            if o.lockable && o.key.is_none() {
                return Err(format!("{:?} lockable without key", o.name));
            }
            match o.place {
                Place::In(c) => {
                    if self.objects[c.0].kind != Kind::Container {
                        return Err(format!("{:?} inside a non-container", o.name));
                    }
                }
                Place::On(s) => {
                    if self.objects[s.0].kind != Kind::Supporter {
                        return Err(format!("{:?} on a non-supporter", o.name));
                    }
                }
                Place::Room(r) if r.0 >= self.rooms.len() => {
                    return Err(format!("{:?} in nonexistent room", o.name));
                }
                _ => {}
            }
        }
        // Containment must be a forest: walking up from any object
        // terminates without revisiting.
        for (i, _) in self.objects.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            let mut cur = ObjId(i);
            loop {
                if !seen.insert(cur) {
                    return Err(format!("containment cycle at {:?}", self.obj(cur).name));
                }
                match self.obj(cur).place {
                    Place::In(p) | Place::On(p) => cur = p,
                    _ => break,
                }
            }
        }
        // Exits are reciprocal and door references consistent.
        for (ri, room) in self.rooms.iter().enumerate() {
            for (&dir, exit) in &room.exits {
                if exit.to.0 >= self.rooms.len() {
                    return Err(format!("exit to nonexistent room from {:?}", room.name));
                }
                let back = self.rooms[exit.to.0].exits.get(&dir.opposite());
                match back {
                    Some(b) if b.to.0 == ri && b.door == exit.door => {}
                    _ => return Err(format!("non-reciprocal exit from {:?}", room.name)),
                }
                if let Some(did) = exit.door {
                    let d = self.door(did);
                    let pair = (RoomId(ri), exit.to);
                    if d.rooms != pair && d.rooms != (pair.1, pair.0) {
                        return Err(format!("door {:?} references wrong rooms", d.name));
                    }
                }
            }
        }
        Ok(())
    }

    /// Stable content hash for walkthrough deduplication.
    pub fn fingerprint(&self) -> u64 {
        let mut repr = String::new();
        repr.push_str(&format!("p{};", self.player.0));
        for o in &self.objects {
            repr.push_str(&format!(
                "o{}:{}{}{}{:?};",
                o.name,
                u8::from(o.open),
                u8::from(o.locked),
                u8::from(o.place == Place::Gone),
                o.place
            ));
        }
        for d in &self.doors {
            repr.push_str(&format!("d{}:{}{};", d.name, u8::from(d.open), u8::from(d.locked)));
        }
        fnv1a64(repr.as_bytes())
    }
}
