//! Token vocabulary with reserved specials.

use crate::rng::fnv1a64;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const BOS: usize = 2;
pub const EOS: usize = 3;
/// Separator between commands in concatenated targets.
pub const SEP: usize = 4;
/// End-of-command-set marker for hierarchical session decoding.
pub const EOCS: usize = 5;

const SPECIALS: [&str; 6] = ["<pad>", "<unk>", "<bos>", "<eos>", "<sep>", "<eocs>"];

/// Bidirectional token <-> id map.  Ids 0..6 are the specials above, in that
/// order; the rest follow first-occurrence order of the corpus the vocab was
/// built from (training split only, by convention).
#[derive(Clone, Debug, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    index: std::collections::HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        let mut v = Vocab { words: Vec::new(), index: Default::default() };
        for w in SPECIALS {
            v.push(w);
        }
        v
    }

    fn push(&mut self, word: &str) -> usize {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len();
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    /// Build from token streams; insertion order is specials first, then
    /// first occurrence.
    pub fn build<'a>(streams: impl IntoIterator<Item = &'a [String]>) -> Self {
        let mut v = Vocab::new();
        for toks in streams {
            for t in toks {
                v.push(t);
            }
        }
        v
    }

    /// Rebuild from an explicit word list (checkpoint loading).  The list
    /// must start with the six specials.
    pub fn from_words(words: Vec<String>) -> Result<Self, String> {
        if words.len() < SPECIALS.len() || words[..SPECIALS.len()] != SPECIALS {
            return Err(format!(
                "vocabulary must start with the reserved specials {SPECIALS:?}"
            ));
        }
        let mut v = Vocab { words: Vec::new(), index: Default::default() };
        for w in &words {
            if v.index.contains_key(w) {
                return Err(format!("duplicate vocabulary entry {w:?}"));
            }
            v.push(w);
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false // specials are always present
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Token -> id; unknown tokens map to [`UNK`].
    pub fn encode(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn encode_all(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.encode(t)).collect()
    }

    /// Id -> token; panics on out-of-range ids (programmer error).
    pub fn decode(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Stable content hash (used by checkpoints to reject mismatched vocabs).
    pub fn hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.words.join("\n").as_bytes()))
    }
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::new()
    }
}
