//! Text handling: tokenization, vocabulary, dataset records, and corpus
//! statistics.
//!
//! Dataset files are UTF-8 JSON-Lines, one [`DataPoint`] per line, with an
//! optional leading `{"_meta": ...}` line carrying tool version, seed, and
//! config digest.  Contexts are stored in canonical tokenized form (lower
//! case, punctuation split off, single spaces), so `tokenize(join(tokens))`
//! round-trips exactly.

mod data;
mod stats;
mod vocab;

pub use data::{load_jsonl, save_jsonl, DataPoint, EntitySpan, FileMeta, Task};
pub use stats::{compute_stats, seen_command_set, SplitStats};
pub use vocab::{Vocab, BOS, EOCS, EOS, PAD, SEP, UNK};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed { path: String, line: usize, message: String },
}

/// Lower-case, split on whitespace, and detach `. , ! ? '` as standalone
/// tokens.  Idempotent on its own output.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if matches!(ch, '.' | ',' | '!' | '?' | '\'') {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            out.push(ch.to_string());
        } else {
            for lc in ch.to_lowercase() {
                cur.push(lc);
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_splits_punctuation() {
        assert_eq!(
            tokenize("You see a closed box."),
            vec!["you", "see", "a", "closed", "box", "."]
        );
        assert_eq!(tokenize("don't"), vec!["don", "'", "t"]);
        assert_eq!(tokenize("what else, what else?"), vec![
            "what", "else", ",", "what", "else", "?"
        ]);
    }

    #[test]
    fn tokenize_empty_and_whitespace() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \n\t ").is_empty());
    }

    #[test]
    fn tokenize_is_idempotent_on_joined_output() {
        let text = "-= attic =- you ! are , carrying nothing . it ' s fine";
        let toks = tokenize(text);
        let rejoined = toks.join(" ");
        assert_eq!(tokenize(&rejoined), toks);
        assert_eq!(rejoined, text);
    }
}
