//! Dataset records and JSON-Lines I/O.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{tokenize, CorpusError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// One point per game state; targets are *all* admissible commands.
    Acg,
    /// One point per (state, entity); targets are the commands whose first
    /// entity slot is that entity.  Empty target sets are kept.
    Acge,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Acg => "acg",
            Task::Acge => "acge",
        }
    }
}

/// Inclusive token span `[start, end]` where an entity's name occurs in the
/// context.  `start == end` for single-token names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

/// One dataset record.  `context` is held tokenized in memory and stored as
/// a single canonical string on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DataPoint {
    pub game_id: String,
    pub state_id: String,
    pub context: Vec<String>,
    pub entities: Vec<EntitySpan>,
    pub commands: Vec<String>,
    pub task: Task,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    game_id: String,
    state_id: String,
    context: String,
    entities: Vec<EntitySpan>,
    commands: Vec<String>,
    task: Task,
}

impl Serialize for DataPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawPoint {
            game_id: self.game_id.clone(),
            state_id: self.state_id.clone(),
            context: self.context.join(" "),
            entities: self.entities.clone(),
            commands: self.commands.clone(),
            task: self.task,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DataPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawPoint::deserialize(d)?;
        Ok(DataPoint {
            game_id: raw.game_id,
            state_id: raw.state_id,
            context: tokenize(&raw.context),
            entities: raw.entities,
            commands: raw.commands,
            task: raw.task,
        })
    }
}

impl DataPoint {
    /// Structural validity: spans in range and matching the context tokens,
    /// ACGE arity, duplicate-free commands.
    pub fn validate(&self) -> Result<(), String> {
        if self.context.is_empty() {
            return Err("empty context".into());
        }
        for e in &self.entities {
            if e.start > e.end || e.end >= self.context.len() {
                return Err(format!(
                    "entity {:?} span {}..={} out of range for context of {} tokens",
                    e.name,
                    e.start,
                    e.end,
                    self.context.len()
                ));
            }
            let span = self.context[e.start..=e.end].join(" ");
            if span != e.name {
                return Err(format!("entity {:?} does not match span text {:?}", e.name, span));
            }
        }
        if self.task == Task::Acge && self.entities.len() != 1 {
            return Err(format!("acge point carries {} entity spans", self.entities.len()));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.commands {
            if !seen.insert(c) {
                return Err(format!("duplicate command {c:?}"));
            }
        }
        Ok(())
    }
}

/// First-line metadata object; every file this toolkit writes carries one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FileMeta {
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    _meta: FileMeta,
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io { path: path.display().to_string(), source }
}

pub fn save_jsonl(
    path: &Path,
    meta: Option<&FileMeta>,
    points: &[DataPoint],
) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write_line = |v: String| -> Result<(), CorpusError> {
        w.write_all(v.as_bytes()).map_err(|e| io_err(path, e))?;
        w.write_all(b"\n").map_err(|e| io_err(path, e))
    };
    if let Some(m) = meta {
        write_line(serde_json::to_string(&MetaLine { _meta: m.clone() }).unwrap())?;
    }
    for p in points {
        write_line(serde_json::to_string(p).unwrap())?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn load_jsonl(path: &Path) -> Result<(Option<FileMeta>, Vec<DataPoint>), CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut meta = None;
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let malformed = |message: String| CorpusError::Malformed {
            path: path.display().to_string(),
            line: lineno,
            message,
        };
        if lineno == 1 && line.contains("\"_meta\"") {
            let m: MetaLine =
                serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
            meta = Some(m._meta);
            continue;
        }
        let p: DataPoint = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        p.validate().map_err(malformed)?;
        points.push(p);
    }
    Ok((meta, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point() -> DataPoint {
        DataPoint {
            game_id: "g0001".into(),
            state_id: "g0001_s000".into(),
            context: tokenize("you see a closed type p box . you are carrying nothing ."),
            entities: vec![EntitySpan { name: "type p box".into(), start: 4, end: 6 }],
            commands: vec!["open type p box".into()],
            task: Task::Acge,
        }
    }

    #[test]
    fn round_trip_preserves_points() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        let meta = FileMeta {
            version: "0.1.0".into(),
            seed: Some(7),
            config_digest: Some("abcd".into()),
        };
        let pts = vec![point()];
        save_jsonl(&path, Some(&meta), &pts).unwrap();
        let (m, loaded) = load_jsonl(&path).unwrap();
        assert_eq!(m, Some(meta));
        assert_eq!(loaded, pts);
    }

    #[test]
    fn empty_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        save_jsonl(&path, None, &[]).unwrap();
        let (m, loaded) = load_jsonl(&path).unwrap();
        assert!(m.is_none());
        assert!(loaded.is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = serde_json::to_string(&point()).unwrap();
        std::fs::write(&path, format!("{good}\nnot json\n")).unwrap();
        match load_jsonl(&path) {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn span_mismatch_is_rejected() {
        let mut p = point();
        p.entities[0].start = 0;
        p.entities[0].end = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_token_span_is_allowed() {
        let mut p = point();
        p.context = tokenize("there is an unblocked exit to the east .");
        p.entities = vec![EntitySpan { name: "east".into(), start: 7, end: 7 }];
        p.commands = vec!["go east".into()];
        p.validate().unwrap();
    }

    #[test]
    fn missing_required_key_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing.jsonl");
        std::fs::write(&path, "{\"game_id\": \"g\"}\n").unwrap();
        assert!(matches!(load_jsonl(&path), Err(CorpusError::Malformed { .. })));
    }
}
