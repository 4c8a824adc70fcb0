//! Exhaustive interview analysis: every answer sequence, its outcome, and
//! queries over the outcomes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{AnswerRecord, EngineError, Session};
use crate::model::Model;
use crate::space::{Constraint, Coord, Location, PolicySpace, SlotKind, SubspacePredicate};

/// One complete answer sequence and the index of its outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathOutcome {
    pub answers: Vec<AnswerRecord>,
    pub outcome: usize,
}

/// An answer sequence that ended in a runtime fault.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathFault {
    pub answers: Vec<AnswerRecord>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeSet {
    pub paths: Vec<PathOutcome>,
    /// Distinct final locations, in order of first appearance.
    pub outcomes: Vec<Location>,
    pub faults: Vec<PathFault>,
    /// Set when enumeration stopped at the path limit.
    pub partial: bool,
}

impl OutcomeSet {
    pub fn paths_to(&self, outcome: usize) -> impl Iterator<Item = &PathOutcome> {
        self.paths.iter().filter(move |p| p.outcome == outcome)
    }

    /// Number of paths reaching an outcome.
    pub fn count(&self, outcome: usize) -> usize {
        self.paths_to(outcome).count()
    }

    /// The first path found that reaches an outcome.
    pub fn witness(&self, outcome: usize) -> Option<&PathOutcome> {
        self.paths_to(outcome).next()
    }
}

/// Enumerates all answer sequences, depth first in answer order. Stops after
/// `max_paths` completed or faulted paths and marks the set partial.
pub fn enumerate_outcomes(model: &Model, max_paths: usize) -> OutcomeSet {
    let mut set = OutcomeSet {
        paths: Vec::new(),
        outcomes: Vec::new(),
        faults: Vec::new(),
        partial: false,
    };
    let mut index: BTreeMap<Vec<Coord>, usize> = BTreeMap::new();
    let mut stack = match Session::start(model) {
        Ok(s) => alloc::vec![s],
        Err(e) => {
            set.faults.push(PathFault {
                answers: Vec::new(),
                message: e.to_string(),
            });
            return set;
        }
    };
    while let Some(s) = stack.pop() {
        if set.paths.len() + set.faults.len() >= max_paths {
            set.partial = true;
            break;
        }
        if s.is_finished() {
            let next = index.len();
            let outcome = *index.entry(s.location().coords().to_vec()).or_insert_with(|| {
                set.outcomes.push(s.location().clone());
                next
            });
            set.paths.push(PathOutcome {
                answers: s.transcript().to_vec(),
                outcome,
            });
            continue;
        }
        let answers = s.available_answers(model);
        // reversed so the first answer is explored first
        for a in answers.into_iter().rev() {
            let mut next = s.clone();
            match next.answer(model, a) {
                Ok(()) => stack.push(next),
                Err(e) => {
                    let mut answers = s.transcript().to_vec();
                    answers.push(AnswerRecord {
                        node_id: s.current_node_id(model).unwrap_or("").to_string(),
                        answer: a.to_string(),
                    });
                    set.faults.push(PathFault {
                        answers,
                        message: fault_message(&e),
                    });
                }
            }
        }
    }
    set
}

fn fault_message(e: &EngineError) -> String {
    e.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct QueryError {
    pub column: usize,
    pub message: String,
}

/// Parses `Slot=value`, `Slot>=value`, `Slot<=value` and `Aggregate contains
/// value` terms joined by `AND` (case-insensitive) into a predicate.
pub fn parse_query(space: &PolicySpace, text: &str) -> Result<SubspacePredicate, QueryError> {
    let mut pred = SubspacePredicate::any(space);
    let mut offset = 0;
    let mut terms = Vec::new();
    let lower = text.to_ascii_lowercase();
    let mut start = 0;
    while let Some(i) = lower[offset..].find(" and ") {
        terms.push((start, &text[start..offset + i]));
        start = offset + i + 5;
        offset = start;
    }
    terms.push((start, &text[start..]));

    for (at, raw) in terms {
        let lead = raw.len() - raw.trim_start().len();
        let column = at + lead + 1;
        let term = raw.trim();
        let err = |message: String| QueryError { column, message };
        if term.is_empty() {
            return Err(err("empty term".into()));
        }
        let (slot, op, value) = if let Some((s, v)) = split_word(term, "contains") {
            (s, "contains", v)
        } else if let Some((s, v)) = term.split_once(">=") {
            (s.trim(), ">=", v.trim())
        } else if let Some((s, v)) = term.split_once("<=") {
            (s.trim(), "<=", v.trim())
        } else if let Some((s, v)) = term.split_once('=') {
            (s.trim(), "=", v.trim())
        } else {
            return Err(err(format!("expected `=`, `>=`, `<=` or `contains` in `{term}`")));
        };
        let id = space.find_slot(slot).ok_or_else(|| err(format!("unknown slot `{slot}`")))?;
        let kind = space.slot(id).kind;
        let (dim, constraint) = match (kind, op) {
            (SlotKind::Aggregate, "contains") => {
                let d = space
                    .member_dimension(id, value)
                    .ok_or_else(|| err(format!("slot `{slot}` has no value `{value}`")))?;
                (d, Constraint::AtLeast(1))
            }
            (SlotKind::Atomic, "contains") | (SlotKind::Aggregate, _) => {
                return Err(err(format!("`{op}` does not apply to slot `{slot}`")))
            }
            (SlotKind::Atomic, _) => {
                let d = space.atomic_dimension(id).expect("atomic");
                let c = space
                    .value_coord(id, value)
                    .ok_or_else(|| err(format!("slot `{slot}` has no value `{value}`")))?;
                let con = match op {
                    ">=" => Constraint::AtLeast(c),
                    "<=" => Constraint::AtMost(c),
                    _ => Constraint::OneOf(alloc::vec![c]),
                };
                (d, con)
            }
            _ => return Err(err(format!("slot `{slot}` has no coordinates"))),
        };
        pred = pred.with(space, dim, constraint).map_err(|e| err(e.to_string()))?;
    }
    Ok(pred)
}

fn split_word<'a>(term: &'a str, word: &str) -> Option<(&'a str, &'a str)> {
    let lower = term.to_ascii_lowercase();
    let i = lower.find(&format!(" {word} "))?;
    Some((term[..i].trim(), term[i + word.len() + 2..].trim()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryResult {
    /// Outcome indices inside the predicate.
    pub outcomes: Vec<usize>,
    /// Paths reaching one of those outcomes.
    pub paths: Vec<PathOutcome>,
    pub partial: bool,
}

pub fn query(set: &OutcomeSet, predicate: &SubspacePredicate) -> QueryResult {
    let outcomes: Vec<usize> = (0..set.outcomes.len())
        .filter(|&i| predicate.contains(&set.outcomes[i]).unwrap_or(false))
        .collect();
    QueryResult {
        paths: set
            .paths
            .iter()
            .filter(|p| outcomes.contains(&p.outcome))
            .cloned()
            .collect(),
        outcomes,
        partial: set.partial,
    }
}

/// `Dim=label` pairs for the non-bottom coordinates of a location.
pub fn describe_location(space: &PolicySpace, l: &Location) -> String {
    let parts: Vec<String> = space
        .dimensions()
        .iter()
        .enumerate()
        .filter(|(d, _)| l.get(*d) != 0)
        .map(|(d, dim)| {
            let short = dim.path.split_once('/').map_or(dim.path.as_str(), |(_, rest)| rest);
            format!("{short}={}", space.coordinate_label(d, l.get(d)))
        })
        .collect();
    if parts.is_empty() {
        String::from("(bottom)")
    } else {
        parts.join(", ")
    }
}

pub fn describe_path(answers: &[AnswerRecord]) -> String {
    if answers.is_empty() {
        return String::from("(no questions)");
    }
    let steps: Vec<String> = answers.iter().map(|a| format!("{}={}", a.node_id, a.answer)).collect();
    steps.join(" > ")
}

/// Plain-text table: one block per outcome listing the paths reaching it.
pub fn render_outcomes(space: &PolicySpace, set: &OutcomeSet, only: Option<&[usize]>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} paths, {} outcomes{}",
        set.paths.len(),
        set.outcomes.len(),
        if set.partial { " (partial: path limit reached)" } else { "" }
    );
    for (i, l) in set.outcomes.iter().enumerate() {
        if only.is_some_and(|o| !o.contains(&i)) {
            continue;
        }
        let _ = writeln!(out, "outcome {}: {}", i + 1, describe_location(space, l));
        for p in set.paths_to(i) {
            let _ = writeln!(out, "  {}", describe_path(&p.answers));
        }
    }
    for f in &set.faults {
        let _ = writeln!(out, "fault: {} ({})", describe_path(&f.answers), f.message);
    }
    out
}
