//! Corpus statistics: command counts per point and unseen-command tallies.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DataPoint;

/// Summary of one dataset split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub points: usize,
    /// Total command instances (sum over points).
    pub command_instances: usize,
    /// Mean commands per point.
    pub mean_commands: f64,
    /// Population standard deviation of commands per point.
    pub std_commands: f64,
    /// Distinct command strings in the split.
    pub unique_commands: usize,
    /// Command instances whose string does not occur in the reference
    /// (training) command set.  `None` when no reference was given.
    pub unseen_instances: Option<usize>,
    /// Distinct unseen command strings.
    pub unseen_unique: Option<usize>,
}

/// All command strings of a split (used as the "seen" reference set).
pub fn seen_command_set(points: &[DataPoint]) -> BTreeSet<String> {
    let mut set = BTreeSet::new();
    for p in points {
        for c in &p.commands {
            set.insert(c.clone());
        }
    }
    set
}

pub fn compute_stats(points: &[DataPoint], train_seen: Option<&BTreeSet<String>>) -> SplitStats {
    let counts: Vec<f64> = points.iter().map(|p| p.commands.len() as f64).collect();
    let n = counts.len() as f64;
    let total: f64 = counts.iter().sum();
    let mean = if counts.is_empty() { 0.0 } else { total / n };
    let var = if counts.is_empty() {
        0.0
    } else {
        counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n
    };

    let mut unique = BTreeSet::new();
    for p in points {
        for c in &p.commands {
            unique.insert(c.as_str());
        }
    }

    let (unseen_instances, unseen_unique) = match train_seen {
        None => (None, None),
        Some(seen) => {
            let mut inst = 0usize;
            let mut uniq = BTreeSet::new();
            for p in points {
                for c in &p.commands {
                    if !seen.contains(c) {
                        inst += 1;
                        uniq.insert(c.as_str());
                    }
                }
            }
            (Some(inst), Some(uniq.len()))
        }
    };

    SplitStats {
        points: points.len(),
        command_instances: total as usize,
        mean_commands: mean,
        std_commands: var.sqrt(),
        unique_commands: unique.len(),
        unseen_instances,
        unseen_unique,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textcorpus::{tokenize, Task};

    fn point(id: &str, commands: &[&str]) -> DataPoint {
        DataPoint {
            game_id: "g".into(),
            state_id: id.into(),
            context: tokenize("you are carrying nothing ."),
            entities: vec![],
            commands: commands.iter().map(|s| s.to_string()).collect(),
            task: Task::Acg,
        }
    }

    #[test]
    fn mean_and_population_std() {
        let pts = vec![
            point("s0", &["a", "b"]),
            point("s1", &["a", "b", "c"]),
            point("s2", &["a", "b", "c", "d"]),
        ];
        let s = compute_stats(&pts, None);
        assert_eq!(s.points, 3);
        assert_eq!(s.command_instances, 9);
        assert!((s.mean_commands - 3.0).abs() < 1e-12);
        assert!((s.std_commands - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.unique_commands, 4);
        assert_eq!(s.unseen_instances, None);
    }

    #[test]
    fn unseen_counts_against_reference() {
        let train = vec![point("t0", &["go east", "open box"])];
        let seen = seen_command_set(&train);
        let test = vec![point("s0", &["go east", "take lamp", "take lamp from shelf"])];
        let s = compute_stats(&test, Some(&seen));
        assert_eq!(s.unseen_instances, Some(2));
        assert_eq!(s.unseen_unique, Some(2));
    }

    #[test]
    fn split_evaluated_against_itself_has_zero_unseen() {
        let pts = vec![point("s0", &["go east"]), point("s1", &["go east", "go west"])];
        let seen = seen_command_set(&pts);
        let s = compute_stats(&pts, Some(&seen));
        assert_eq!(s.unseen_instances, Some(0));
        assert_eq!(s.unseen_unique, Some(0));
    }

    #[test]
    fn empty_split() {
        let s = compute_stats(&[], None);
        assert_eq!(s.points, 0);
        assert_eq!(s.mean_commands, 0.0);
        assert_eq!(s.std_commands, 0.0);
    }
}
