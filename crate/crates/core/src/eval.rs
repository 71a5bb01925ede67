//! Set-level scoring of predicted command sets against gold sets.
//!
//! Commands are compared as exact strings.  Inputs are treated as sets:
//! duplicates collapse and order never matters.  Points where both the
//! prediction and the gold set are empty contribute nothing to the
//! precision/recall pools (there is nothing to get right or wrong) but
//! still count toward the exact-match rate.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

/// Counts from comparing one predicted set against one gold set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SetMatch {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl SetMatch {
    pub fn add(&mut self, other: SetMatch) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn is_exact(&self) -> bool {
        self.fp == 0 && self.fn_ == 0
    }
}

pub fn match_sets(pred: &[String], gold: &[String]) -> SetMatch {
    let pred: BTreeSet<&String> = pred.iter().collect();
    let gold: BTreeSet<&String> = gold.iter().collect();
    SetMatch {
        tp: pred.intersection(&gold).count(),
        fp: pred.difference(&gold).count(),
        fn_: gold.difference(&pred).count(),
    }
}

/// Precision, recall, and their harmonic mean.
///
/// An empty side is scored by what it should have been: no predictions
/// against an empty gold set is perfect (1.0), no predictions against a
/// non-empty one scores zero, and symmetrically for recall.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(m: SetMatch) -> Prf {
        let vacuous_ok = |num: usize, den: usize, other_den: usize| -> f64 {
            if den == 0 {
                if other_den == 0 { 1.0 } else { 0.0 }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = vacuous_ok(m.tp, m.tp + m.fp, m.tp + m.fn_);
        let recall = vacuous_ok(m.tp, m.tp + m.fn_, m.tp + m.fp);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

/// One scored prediction.
#[derive(Clone, Debug)]
pub struct EvalPoint {
    pub pred: Vec<String>,
    pub gold: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    /// All points, including ones where both sides were empty.
    pub points: usize,
    /// Points with at least one predicted or gold command.
    pub scored_points: usize,
    /// Pooled true positives across scored points.
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// Scores over the pooled counts.
    pub micro: Prf,
    /// Mean of per-point scores over scored points.
    pub macro_: Prf,
    /// Fraction of all points whose predicted set equals the gold set.
    pub exact_match_rate: f64,
    /// Recall over gold commands that appear in `seen`; `None` if no gold
    /// command does.
    pub seen_recall: Option<f64>,
    /// Recall over gold commands outside `seen`; `None` if every gold
    /// command is seen.
    pub unseen_recall: Option<f64>,
}

/// Score a batch of predictions.  `seen` is the set of command strings
/// available at training time, used to split recall into seen/unseen.
pub fn aggregate(points: &[EvalPoint], seen: &HashSet<String>) -> Report {
    let mut pooled = SetMatch::default();
    let mut scored = 0usize;
    let mut exact = 0usize;
    let mut macro_sum = (0.0, 0.0, 0.0);
    let (mut seen_hit, mut seen_total) = (0usize, 0usize);
    let (mut unseen_hit, mut unseen_total) = (0usize, 0usize);

    for point in points {
        let m = match_sets(&point.pred, &point.gold);
        if m.is_exact() {
            exact += 1;
        }
        if m == SetMatch::default() {
            continue; // nothing predicted, nothing expected
        }
        scored += 1;
        pooled.add(m);
        let prf = Prf::from_counts(m);
        macro_sum.0 += prf.precision;
        macro_sum.1 += prf.recall;
        macro_sum.2 += prf.f1;

        let pred: BTreeSet<&String> = point.pred.iter().collect();
        let gold: BTreeSet<&String> = point.gold.iter().collect();
        for g in gold {
            let (hit, total) = if seen.contains(g.as_str()) {
                (&mut seen_hit, &mut seen_total)
            } else {
                (&mut unseen_hit, &mut unseen_total)
            };
            *total += 1;
            if pred.contains(g) {
                *hit += 1;
            }
        }
    }

    let ratio = |num: usize, den: usize| num as f64 / den as f64;
    let macro_ = if scored == 0 {
        Prf { precision: 1.0, recall: 1.0, f1: 1.0 }
    } else {
        Prf {
            precision: macro_sum.0 / scored as f64,
            recall: macro_sum.1 / scored as f64,
            f1: macro_sum.2 / scored as f64,
        }
    };
    Report {
        points: points.len(),
        scored_points: scored,
        tp: pooled.tp,
        fp: pooled.fp,
        fn_: pooled.fn_,
        micro: Prf::from_counts(pooled),
        macro_,
        exact_match_rate: if points.is_empty() { 1.0 } else { ratio(exact, points.len()) },
        seen_recall: (seen_total > 0).then(|| ratio(seen_hit, seen_total)),
        unseen_recall: (unseen_total > 0).then(|| ratio(unseen_hit, unseen_total)),
    }
}

/// Missing/extra command counts bucketed by gold-set size, ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LengthRow {
    pub gold_size: usize,
    pub points: usize,
    pub missing: usize,
    pub extra: usize,
}

pub fn length_breakdown(points: &[EvalPoint]) -> Vec<LengthRow> {
    let mut rows: BTreeMap<usize, LengthRow> = BTreeMap::new();
    for point in points {
        let m = match_sets(&point.pred, &point.gold);
        let size = m.tp + m.fn_;
        let row = rows
            .entry(size)
            .or_insert(LengthRow { gold_size: size, points: 0, missing: 0, extra: 0 });
        row.points += 1;
        row.missing += m.fn_;
        row.extra += m.fp;
    }
    rows.into_values().collect()
}

pub fn length_breakdown_csv(rows: &[LengthRow]) -> String {
    let mut out = String::from("gold_size,points,missing,extra\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.gold_size, r.points, r.missing, r.extra));
    }
    out
}

/// Human-readable summary of a report.
pub fn render_report(r: &Report) -> String {
    let opt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.4}"),
        None => "n/a".to_string(),
    };
    let mut out = String::new();
    out.push_str(&format!("points            {}  (scored {})\n", r.points, r.scored_points));
    out.push_str(&format!("pooled tp/fp/fn   {}/{}/{}\n", r.tp, r.fp, r.fn_));
    out.push_str(&format!(
        "micro p/r/f1      {:.4}/{:.4}/{:.4}\n",
        r.micro.precision, r.micro.recall, r.micro.f1
    ));
    out.push_str(&format!(
        "macro p/r/f1      {:.4}/{:.4}/{:.4}\n",
        r.macro_.precision, r.macro_.recall, r.macro_.f1
    ));
    out.push_str(&format!("exact-match rate  {:.4}\n", r.exact_match_rate));
    out.push_str(&format!("seen recall       {}\n", opt(r.seen_recall)));
    out.push_str(&format!("unseen recall     {}\n", opt(r.unseen_recall)));
    out
}
