//! Command grammar: eleven verbs over direction/entity arguments.

use std::fmt;

/// The verb part of a command.  `TakeFrom` and `Take` are distinct verbs:
/// "take apple" only works on floor objects, "take apple from shelf" only
/// on held-by-something objects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verb {
    Go,
    Open,
    Close,
    Take,
    TakeFrom,
    Drop,
    PutOn,
    InsertInto,
    Eat,
    Lock,
    Unlock,
}

impl Verb {
    pub const ALL: [Verb; 11] = [
        Verb::Go,
        Verb::Open,
        Verb::Close,
        Verb::Take,
        Verb::TakeFrom,
        Verb::Drop,
        Verb::PutOn,
        Verb::InsertInto,
        Verb::Eat,
        Verb::Lock,
        Verb::Unlock,
    ];

    pub fn arity(self) -> usize {
        match self {
            Verb::Go | Verb::Open | Verb::Close | Verb::Take | Verb::Drop | Verb::Eat => 1,
            Verb::TakeFrom | Verb::PutOn | Verb::InsertInto | Verb::Lock | Verb::Unlock => 2,
        }
    }
}

/// A fully grounded command: a verb plus its argument phrases.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Command {
    pub verb: Verb,
    pub args: Vec<String>,
}

impl Command {
    pub fn unary(verb: Verb, arg: impl Into<String>) -> Command {
        debug_assert_eq!(verb.arity(), 1);
        Command { verb, args: vec![arg.into()] }
    }

    pub fn binary(verb: Verb, a: impl Into<String>, b: impl Into<String>) -> Command {
        debug_assert_eq!(verb.arity(), 2);
        Command { verb, args: vec![a.into(), b.into()] }
    }

    /// The entity the command is about, for grouping commands by entity:
    /// always the first argument.
    pub fn primary_entity(&self) -> &str {
        &self.args[0]
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verb {
            Verb::Go => write!(f, "go {}", self.args[0]),
            Verb::Open => write!(f, "open {}", self.args[0]),
            Verb::Close => write!(f, "close {}", self.args[0]),
            Verb::Take => write!(f, "take {}", self.args[0]),
            Verb::TakeFrom => write!(f, "take {} from {}", self.args[0], self.args[1]),
            Verb::Drop => write!(f, "drop {}", self.args[0]),
            Verb::PutOn => write!(f, "put {} on {}", self.args[0], self.args[1]),
            Verb::InsertInto => write!(f, "insert {} into {}", self.args[0], self.args[1]),
            Verb::Eat => write!(f, "eat {}", self.args[0]),
            Verb::Lock => write!(f, "lock {} with {}", self.args[0], self.args[1]),
            Verb::Unlock => write!(f, "unlock {} with {}", self.args[0], self.args[1]),
        }
    }
}
