//! Independent reference implementations used to cross-check the engine.
//! They share nothing with the engine beyond the parsed IR.

#![allow(dead_code)]

use policymodel_core::graph::{DecisionGraph, NodeIdx, NodeKind};
use policymodel_core::PolicySpace;

/// Coordinates of the two dimensions an inferencer row constrains,
/// written by hand from the declaration order of the fixture space.
pub mod fig {
    // AgeGroup: under21, workForce, voluntaryPension, pension
    pub const AGE: [&str; 4] = ["under21", "workForce", "voluntaryPension", "pension"];
    // ProcessFairness: ok, flawed, illegal
    pub const FAIRNESS: [&str; 3] = ["ok", "flawed", "illegal"];
    // Plan: None, L1, L2, L3
    pub const PLAN: [&str; 4] = ["None", "L1", "L2", "L3"];

    /// The rows of the Plan inferencer: ((age, fairness), plan), 1-based.
    pub const ROWS: [((u16, u16), u16); 4] = [((1, 1), 1), ((2, 2), 2), ((4, 2), 3), ((4, 3), 4)];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Support,
    Comply,
}

/// Brute-force chain scan. Support: the first anchor at or above `l` on both
/// dimensions. Comply: the last anchor at or below `l`.
pub fn chain_scan(mode: Mode, rows: &[((u16, u16), u16)], l: (u16, u16)) -> Option<u16> {
    let above = |a: (u16, u16)| l.0 <= a.0 && l.1 <= a.1;
    let below = |a: (u16, u16)| a.0 <= l.0 && a.1 <= l.1;
    match mode {
        Mode::Support => rows.iter().find(|(a, _)| above(*a)).map(|r| r.1),
        Mode::Comply => rows.iter().rev().find(|(a, _)| below(*a)).map(|r| r.1),
    }
}

pub type Transcript = Vec<(String, String)>;

/// Walks every answer combination by structural recursion over body chains.
/// Supports ask, set, consider, section (without continue) and todo nodes.
/// `infer` is applied after each set.
pub fn walk(
    g: &DecisionGraph,
    space: &PolicySpace,
    start: Vec<u16>,
    infer: &dyn Fn(&mut [u16]),
) -> Vec<(Transcript, Vec<u16>)> {
    let mut first = start;
    infer(&mut first);
    let entry = g.entry();
    run_chain(g, space, entry, vec![(Vec::new(), first)], infer)
}

fn run_chain(
    g: &DecisionGraph,
    space: &PolicySpace,
    head: Option<NodeIdx>,
    mut states: Vec<(Transcript, Vec<u16>)>,
    infer: &dyn Fn(&mut [u16]),
) -> Vec<(Transcript, Vec<u16>)> {
    let mut cur = head;
    while let Some(i) = cur {
        let node = g.node(i);
        let mut next = Vec::new();
        for (t, loc) in states {
            match &node.kind {
                NodeKind::Set { assignments } => {
                    let mut loc = loc;
                    for a in assignments {
                        for (slot, value) in a.pairs() {
                            let (d, c) = space.resolve_assignment(slot, value).unwrap();
                            loc[d] = loc[d].max(c);
                        }
                    }
                    infer(&mut loc);
                    next.push((t, loc));
                }
                NodeKind::Ask { answers, .. } => {
                    for a in answers {
                        let mut t2 = t.clone();
                        t2.push((node.id.clone(), a.key.clone()));
                        next.extend(run_chain(g, space, a.body, vec![(t2, loc.clone())], infer));
                    }
                }
                NodeKind::Consider { slot, options, otherwise } => {
                    let id = space.find_slot(slot).unwrap();
                    let hit = options.iter().find(|o| {
                        let (d, c) = space.resolve_assignment(space.slot_path(id), &o.value).unwrap();
                        loc[d] == c
                    });
                    let body = match (hit, otherwise) {
                        (Some(o), _) => o.body,
                        (None, Some(b)) => *b,
                        (None, None) => None,
                    };
                    next.extend(run_chain(g, space, body, vec![(t, loc)], infer));
                }
                NodeKind::Section { body, .. } => next.extend(run_chain(g, space, *body, vec![(t, loc)], infer)),
                NodeKind::Todo { .. } => next.push((t, loc)),
                other => panic!("walker does not support {}", other.name()),
            }
        }
        states = next;
        cur = node.successor;
    }
    states
}
