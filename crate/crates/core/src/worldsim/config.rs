//! Generation knobs and the word pools worlds are named from.

use super::WorldError;

/// Tunable world-shape parameters.  Ranges are inclusive.
#[derive(Clone, Debug)]
pub struct WorldConfig {
    pub rooms: (usize, usize),
    pub objects_per_room: (usize, usize),
    /// Probability that a room connection gets a door at all.
    pub door_prob: f64,
    /// Given a door, probability it starts locked (locked implies closed).
    pub door_locked_prob: f64,
    /// Given an unlocked door, probability it starts closed.
    pub door_closed_prob: f64,
    pub container_locked_prob: f64,
    pub container_closed_prob: f64,
    /// Probability a carryable starts on a supporter or inside a container
    /// of its room rather than on the floor.
    pub carryable_nested_prob: f64,
    /// Probability a key starts in the player's hands.
    pub key_in_inventory_prob: f64,
    /// Number of distinct states to collect per game.
    pub walkthrough_len: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            rooms: (2, 3),
            objects_per_room: (1, 2),
            door_prob: 0.4,
            door_locked_prob: 0.35,
            door_closed_prob: 0.5,
            container_locked_prob: 0.25,
            container_closed_prob: 0.5,
            carryable_nested_prob: 0.5,
            key_in_inventory_prob: 0.25,
            walkthrough_len: 10,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self, lex: &Lexicon) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidConfig(m));
        if self.rooms.0 < 1 || self.rooms.0 > self.rooms.1 {
            return bad(format!("room range {:?} is empty or zero", self.rooms));
        }
        if self.rooms.1 > lex.room_names.len() {
            return bad(format!(
                "asked for up to {} rooms but only {} room names exist",
                self.rooms.1,
                lex.room_names.len()
            ));
        }
        if self.objects_per_room.0 > self.objects_per_room.1 {
            return bad(format!("object range {:?} is empty", self.objects_per_room));
        }
        // Worst case every object and door needs its own adjective.
        let max_names = self.rooms.1 * self.objects_per_room.1 + (self.rooms.1 - 1);
        if max_names > lex.adjectives.len() {
            return bad(format!(
                "up to {max_names} named things but only {} adjectives exist",
                lex.adjectives.len()
            ));
        }
        for (label, p) in [
            ("door_prob", self.door_prob),
            ("door_locked_prob", self.door_locked_prob),
            ("door_closed_prob", self.door_closed_prob),
            ("container_locked_prob", self.container_locked_prob),
            ("container_closed_prob", self.container_closed_prob),
            ("carryable_nested_prob", self.carryable_nested_prob),
            ("key_in_inventory_prob", self.key_in_inventory_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{label} = {p} outside [0, 1]"));
            }
        }
        if self.walkthrough_len == 0 {
            return bad("walkthrough_len must be at least 1".into());
        }
        Ok(())
    }
}

/// Word pools for naming rooms, things, and doors.  Every entry is a
/// single lowercase token; the pools are mutually disjoint and avoid
/// direction words and the words used by the renderer's own sentences,
/// so entity spans in rendered text are unambiguous.
#[derive(Clone, Debug)]
pub struct Lexicon {
    pub room_names: Vec<&'static str>,
    pub adjectives: Vec<&'static str>,
    pub container_nouns: Vec<&'static str>,
    pub supporter_nouns: Vec<&'static str>,
    pub portable_nouns: Vec<&'static str>,
    pub food_nouns: Vec<&'static str>,
    pub key_nouns: Vec<&'static str>,
    pub door_nouns: Vec<&'static str>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            room_names: vec![
                "attic", "cellar", "kitchen", "pantry", "parlor", "study", "workshop",
                "greenhouse", "library", "vault", "corridor", "bedroom", "bathroom", "balcony",
                "lounge", "scullery",
            ],
            adjectives: vec![
                "rusty", "shiny", "wooden", "iron", "brass", "copper", "golden", "silver",
                "dusty", "ancient", "tiny", "massive", "red", "blue", "green", "purple", "amber",
                "ivory", "velvet", "marble", "plastic", "steel", "glass", "oak", "pine",
                "crimson", "teal", "ebony", "frosted", "spotted",
            ],
            container_nouns: vec![
                "box", "chest", "crate", "cabinet", "locker", "trunk", "basket", "fridge",
            ],
            supporter_nouns: vec![
                "table", "shelf", "workbench", "counter", "stand", "rack", "bench", "desk",
            ],
            portable_nouns: vec![
                "lamp", "book", "coin", "feather", "bottle", "gear", "rope", "bell", "mug",
                "brush",
            ],
            food_nouns: vec!["apple", "pear", "loaf", "carrot", "pepper", "cookie", "melon", "fig"],
            key_nouns: vec!["key", "keycard", "passkey"],
            door_nouns: vec!["door", "gate", "hatch", "grate"],
        }
    }
}

impl Lexicon {
    /// Every word that may appear in a name; used to prove pools stay
    /// disjoint from grammar and renderer vocabulary.
    pub fn all_words(&self) -> Vec<&'static str> {
        let mut words = Vec::new();
        words.extend(&self.room_names);
        words.extend(&self.adjectives);
        words.extend(&self.container_nouns);
        words.extend(&self.supporter_nouns);
        words.extend(&self.portable_nouns);
        words.extend(&self.food_nouns);
        words.extend(&self.key_nouns);
        words.extend(&self.door_nouns);
        words
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldsim::state::Dir;

    #[test]
    fn default_config_is_valid() {
        WorldConfig::default().validate(&Lexicon::default()).unwrap();
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let lex = Lexicon::default();
        let mut cfg = WorldConfig { rooms: (3, 2), ..WorldConfig::default() };
        assert!(cfg.validate(&lex).is_err());
        cfg = WorldConfig { rooms: (2, 100), ..WorldConfig::default() };
        assert!(cfg.validate(&lex).is_err());
        cfg = WorldConfig { door_prob: 1.5, ..WorldConfig::default() };
        assert!(cfg.validate(&lex).is_err());
        cfg = WorldConfig { walkthrough_len: 0, ..WorldConfig::default() };
        assert!(cfg.validate(&lex).is_err());
    }

    #[test]
    fn lexicon_words_are_unique_single_tokens() {
        let lex = Lexicon::default();
        let words = lex.all_words();
        let mut dedup = words.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(words.len(), dedup.len(), "a word appears in two pools");
        for w in &words {
            assert!(!w.contains(' ') && *w == w.to_lowercase());
            assert!(Dir::parse(w).is_none(), "{w} collides with a direction");
        }
        // None of the pool words belong to the renderer's fixed sentences,
        // so a name's tokens can only match at a genuine mention.
        for fixed in [
            "you", "have", "entered", "the", "see", "a", "an", "closed", "open", "locked",
            "there", "is", "on", "floor", "to", "unblocked", "exit", "carrying", "nothing",
            "contains", "empty", "and", "with", "from", "into", "go", "take", "put", "insert",
            "drop", "eat", "lock", "unlock", "close",
        ] {
            assert!(!words.contains(&fixed), "{fixed} must not be a name word");
        }
    }
}
