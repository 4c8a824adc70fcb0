use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Assignment, DecisionGraph, NodeIdx, NodeKind};
use crate::diag::{Diagnostic, SourcePos};
use crate::space::{PolicySpace, SlotKind};

#[derive(Clone, Copy)]
enum Point {
    Enter(NodeIdx),
    Complete(NodeIdx),
}

/// Result of a static control-flow walk.
pub(crate) struct Flow {
    pub visited: Vec<bool>,
    /// Parts whose body can run to its end without reaching `[end]`.
    pub falls_through: Vec<bool>,
}

/// Walks the graph from `seeds` following engine semantics. Calls are assumed
/// to return; a `[consider]` without `else` may fall through.
pub(crate) fn flow(g: &DecisionGraph, seeds: &[NodeIdx]) -> Flow {
    let n = g.nodes.len();
    let mut visited = vec![false; n];
    let mut completed = vec![false; n];
    let mut falls_through = vec![false; n];
    let mut stack: Vec<Point> = seeds.iter().map(|&s| Point::Enter(s)).collect();
    let enter_or_complete = |body: Option<NodeIdx>, owner: NodeIdx| match body {
        Some(h) => Point::Enter(h),
        None => Point::Complete(owner),
    };
    while let Some(p) = stack.pop() {
        match p {
            Point::Enter(i) => {
                if core::mem::replace(&mut visited[i], true) {
                    continue;
                }
                match &g.nodes[i].kind {
                    NodeKind::Ask { answers, .. } => {
                        stack.extend(answers.iter().map(|a| enter_or_complete(a.body, i)));
                    }
                    NodeKind::Consider { options, otherwise, .. } => {
                        stack.extend(options.iter().map(|o| enter_or_complete(o.body, i)));
                        stack.push(match otherwise {
                            Some(body) => enter_or_complete(*body, i),
                            None => Point::Complete(i),
                        });
                    }
                    NodeKind::Section { body, .. } => stack.push(enter_or_complete(*body, i)),
                    NodeKind::Part { body } => match body {
                        Some(h) => stack.push(Point::Enter(*h)),
                        None => falls_through[i] = true,
                    },
                    NodeKind::Call { target } => {
                        if let Some(part) = g.part(target) {
                            stack.push(Point::Enter(part));
                        }
                        stack.push(Point::Complete(i));
                    }
                    NodeKind::Continue => {
                        if let Some(s) = g.enclosing_section(i) {
                            stack.push(Point::Complete(s));
                        }
                    }
                    NodeKind::End => {}
                    NodeKind::Set { .. } | NodeKind::Todo { .. } => stack.push(Point::Complete(i)),
                }
            }
            Point::Complete(i) => {
                if core::mem::replace(&mut completed[i], true) {
                    continue;
                }
                if let Some(s) = g.nodes[i].successor {
                    stack.push(Point::Enter(s));
                } else if let Some(parent) = g.nodes[i].parent {
                    if matches!(g.nodes[parent].kind, NodeKind::Part { .. }) {
                        falls_through[parent] = true;
                    } else {
                        stack.push(Point::Complete(parent));
                    }
                }
            }
        }
    }
    Flow {
        visited,
        falls_through,
    }
}

fn check_slot_value(
    space: &PolicySpace,
    slot: &str,
    value: &str,
    want_aggregate: bool,
    what: &str,
) -> Option<String> {
    let Some(id) = space.find_slot(slot) else {
        return Some(format!("{what} references unknown slot `{slot}`"));
    };
    let def = space.slot(id);
    match (def.kind, want_aggregate) {
        (SlotKind::Atomic, false) | (SlotKind::Aggregate, true) => {}
        (SlotKind::Aggregate, false) => {
            return Some(format!("aggregate slot `{slot}` must be assigned with `+=`"))
        }
        (SlotKind::Atomic, true) => return Some(format!("atomic slot `{slot}` must be assigned with `=`")),
        (k, _) => {
            let kind = if k == SlotKind::Todo { "TODO" } else { "compound" };
            return Some(format!("{kind} slot `{slot}` has no values"));
        }
    }
    if def.value_index(value).is_none() {
        return Some(format!("slot `{slot}` has no value `{value}`"));
    }
    None
}

/// Statically checks a graph against a space. Never fails; the returned
/// diagnostics are the result.
pub fn validate(graph: &DecisionGraph, space: &PolicySpace) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let err = |pos: SourcePos, msg: String| Diagnostic::error(graph.file_name(pos), pos, msg);
    let warn = |pos: SourcePos, msg: String| Diagnostic::warning(graph.file_name(pos), pos, msg);

    let Some(entry) = graph.entry else {
        out.push(err(SourcePos::new(0, 1, 1), String::from("decision graph has no entry node")));
        return out;
    };

    for (i, node) in graph.nodes.iter().enumerate() {
        match &node.kind {
            NodeKind::Call { target } => match graph.find(target) {
                None => out.push(err(node.pos, format!("call to unknown part `{target}`"))),
                Some(t) if graph.part(target).is_none() => out.push(err(
                    node.pos,
                    format!("call target `{target}` is a {} node, not a part", graph.nodes[t].kind.name()),
                )),
                Some(_) => {}
            },
            NodeKind::Set { assignments } => {
                for a in assignments {
                    let aggregate = matches!(a, Assignment::Aggregate { .. });
                    for (slot, value) in a.pairs() {
                        if let Some(msg) = check_slot_value(space, slot, value, aggregate, "set") {
                            out.push(err(node.pos, msg));
                        }
                    }
                }
            }
            NodeKind::Consider { slot, options, otherwise } => {
                let Some(id) = space.find_slot(slot) else {
                    out.push(err(node.pos, format!("consider references unknown slot `{slot}`")));
                    continue;
                };
                let def = space.slot(id);
                if !matches!(def.kind, SlotKind::Atomic | SlotKind::Aggregate) {
                    out.push(err(node.pos, format!("cannot consider slot `{slot}`: it has no values")));
                    continue;
                }
                for o in options {
                    if def.value_index(&o.value).is_none() {
                        out.push(err(node.pos, format!("slot `{slot}` has no value `{}`", o.value)));
                    }
                }
                if otherwise.is_none() {
                    let uncovered: Vec<&str> = def
                        .values
                        .iter()
                        .map(|v| v.name.as_str())
                        .filter(|v| !options.iter().any(|o| o.value == *v))
                        .collect();
                    if !uncovered.is_empty() {
                        out.push(warn(
                            node.pos,
                            format!(
                                "consider `{}` has no else and does not cover {}; those fall through",
                                node.id,
                                uncovered.join(", ")
                            ),
                        ));
                    }
                }
            }
            NodeKind::Continue if graph.enclosing_section(i).is_none() => {
                out.push(err(node.pos, String::from("continue outside section")));
            }
            _ => {}
        }
    }

    let reach = flow(graph, &[entry]);
    for (i, node) in graph.nodes.iter().enumerate() {
        if reach.visited[i] {
            continue;
        }
        // report only the outermost unreachable node of a region
        let parent_unreachable = node.parent.is_some_and(|p| !reach.visited[p]);
        if !parent_unreachable {
            let what = if matches!(node.kind, NodeKind::Part { .. }) {
                format!("part `{}` is never called", node.id)
            } else {
                format!("node `{}` is unreachable", node.id)
            };
            out.push(warn(node.pos, what));
        }
    }

    for (i, node) in graph.nodes.iter().enumerate() {
        if matches!(node.kind, NodeKind::Part { .. }) && flow(graph, &[i]).falls_through[i] {
            out.push(warn(
                node.pos,
                format!("part `{}` can finish without reaching an [end]", node.id),
            ));
        }
    }
    out
}
