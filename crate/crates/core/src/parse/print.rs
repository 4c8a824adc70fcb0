//! Canonical pretty-printers. Parsing their output yields an IR equal to the input.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::cursor::escape_text;
use crate::graph::{Assignment, DecisionGraph, NodeIdx, NodeKind};
use crate::inference::InferencerDef;
use crate::space::{PolicySpace, SlotKind};

pub fn print_policy_space(space: &PolicySpace) -> String {
    let mut out = String::new();
    for slot in space.slots() {
        let keyword = match slot.kind {
            SlotKind::Atomic => "one of",
            SlotKind::Aggregate => "some of",
            SlotKind::Compound => "consists of",
            SlotKind::Todo => "TODO",
        };
        let items: Vec<&str> = match slot.kind {
            SlotKind::Compound => slot.children.iter().map(|c| c.name.as_str()).collect(),
            _ => slot.values.iter().map(|v| v.name.as_str()).collect(),
        };
        let has_value_remarks = slot.values.iter().any(|v| v.remark.is_some());
        let _ = write!(out, "{}:", slot.name);
        if let Some(r) = &slot.remark {
            let _ = write!(out, " <-- {r}\n ");
        }
        if !has_value_remarks {
            let _ = write!(out, " {keyword}");
            if !items.is_empty() {
                let _ = write!(out, " {}", items.join(", "));
            }
            out.push_str(".\n");
            continue;
        }
        let _ = writeln!(out, " {keyword}");
        for (i, v) in slot.values.iter().enumerate() {
            let sep = if i + 1 == slot.values.len() { "." } else { "," };
            let _ = write!(out, "    {}{sep}", v.name);
            if let Some(r) = &v.remark {
                let _ = write!(out, " <-- {r}");
            }
            out.push('\n');
        }
    }
    out
}

fn print_assignments(out: &mut String, assignments: &[Assignment]) {
    for (i, a) in assignments.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        match a {
            Assignment::Atomic { slot, value } => {
                let _ = write!(out, "{slot}={value}");
            }
            Assignment::Aggregate { slot, values } => {
                let _ = write!(out, "{slot}+={}", values.join(", "));
            }
        }
    }
}

struct GraphPrinter<'g> {
    g: &'g DecisionGraph,
    out: String,
}

impl GraphPrinter<'_> {
    fn pad(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn body(&mut self, head: Option<NodeIdx>, depth: usize) {
        let items: Vec<NodeIdx> = self.g.chain(head).collect();
        for i in items {
            self.node(i, depth);
        }
    }

    fn node(&mut self, i: NodeIdx, depth: usize) {
        let n = &self.g.nodes()[i];
        self.pad(depth);
        if let NodeKind::Part { body } = &n.kind {
            let _ = writeln!(self.out, "[-->{}<", n.id);
            self.body(*body, depth + 1);
            self.pad(depth);
            self.out.push_str("--]\n");
            return;
        }
        self.out.push('[');
        if n.explicit_id {
            let _ = write!(self.out, ">{}< ", n.id);
        }
        match &n.kind {
            NodeKind::Ask { text, answers } => {
                let _ = writeln!(self.out, "ask:");
                self.pad(depth + 1);
                let _ = writeln!(self.out, "{{text: {}}}", escape_text(text, &['{', '}']));
                self.pad(depth + 1);
                self.out.push_str("{answers:\n");
                for a in answers.iter().filter(|a| !a.implicit) {
                    self.pad(depth + 2);
                    let _ = writeln!(self.out, "{{{}:", escape_text(&a.key, &[':', '{', '}']));
                    self.body(a.body, depth + 3);
                    self.pad(depth + 2);
                    self.out.push_str("}\n");
                }
                self.pad(depth + 1);
                self.out.push_str("}]\n");
            }
            NodeKind::Set { assignments } => {
                self.out.push_str("set: ");
                print_assignments(&mut self.out, assignments);
                self.out.push_str("]\n");
            }
            NodeKind::Call { target } => {
                let _ = writeln!(self.out, "call: {target}]");
            }
            NodeKind::Consider { slot, options, otherwise } => {
                let _ = writeln!(self.out, "consider: {{slot: {slot}}}");
                self.pad(depth + 1);
                self.out.push_str("{options:\n");
                for o in options {
                    self.pad(depth + 2);
                    let _ = writeln!(self.out, "{{{}:", o.value);
                    self.body(o.body, depth + 3);
                    self.pad(depth + 2);
                    self.out.push_str("}\n");
                }
                self.pad(depth + 1);
                self.out.push_str("}\n");
                if let Some(body) = otherwise {
                    self.pad(depth + 1);
                    self.out.push_str("{else:\n");
                    self.body(*body, depth + 2);
                    self.pad(depth + 1);
                    self.out.push_str("}\n");
                }
                self.pad(depth);
                self.out.push_str("]\n");
            }
            NodeKind::Section { title, body } => {
                let _ = writeln!(self.out, "section: {{title: {}}}", escape_text(title, &['{', '}']));
                self.body(*body, depth + 1);
                self.pad(depth);
                self.out.push_str("]\n");
            }
            NodeKind::End => self.out.push_str("end]\n"),
            NodeKind::Continue => self.out.push_str("continue]\n"),
            NodeKind::Todo { note } => {
                let _ = writeln!(self.out, "todo: {}]", escape_text(note, &[']']));
            }
            NodeKind::Part { .. } => unreachable!("handled above"),
        }
    }
}

/// One text per source file of the graph.
pub fn print_decision_graph(graph: &DecisionGraph) -> Vec<String> {
    graph
        .file_items()
        .iter()
        .map(|items| {
            let mut p = GraphPrinter {
                g: graph,
                out: String::new(),
            };
            for &i in items {
                p.node(i, 0);
            }
            p.out
        })
        .collect()
}

pub fn print_value_inferencers(inferencers: &[InferencerDef]) -> String {
    let mut out = String::new();
    for inf in inferencers {
        let _ = writeln!(out, "[{}: {}", inf.target, inf.mode.keyword());
        for row in &inf.rows {
            out.push_str("  [");
            print_assignments(&mut out, &row.anchor);
            let _ = writeln!(out, " -> {}]", row.value);
        }
        out.push_str("]\n");
    }
    out
}
