use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{DecisionGraph, NodeKind};
use crate::inference::InferencerDef;
use crate::space::{DimensionKind, PolicySpace, SlotKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TodoEntry {
    pub node: String,
    pub note: String,
    pub file: String,
    pub line: u32,
    pub column: u32,
}

/// Work left in a model: TODO constructs and unused space entities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TodoReport {
    pub todo_nodes: Vec<TodoEntry>,
    pub todo_slots: Vec<String>,
    /// Dimensions no `[set]` or inferencer ever writes.
    pub unused_dimensions: Vec<String>,
    /// `slot-path/value` entries never mentioned by a `[set]`, `[consider]` or inferencer row.
    pub unused_values: Vec<String>,
}

impl TodoReport {
    pub fn is_empty(&self) -> bool {
        self.todo_nodes.is_empty()
            && self.todo_slots.is_empty()
            && self.unused_dimensions.is_empty()
            && self.unused_values.is_empty()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut section = |title: &str, items: &mut dyn Iterator<Item = String>| {
            let items: Vec<String> = items.collect();
            let _ = writeln!(out, "{title} ({}):", items.len());
            for i in items {
                let _ = writeln!(out, "  {i}");
            }
        };
        section(
            "TODO nodes",
            &mut self
                .todo_nodes
                .iter()
                .map(|t| format!("{}:{}:{} [{}] {}", t.file, t.line, t.column, t.node, t.note)),
        );
        section("TODO slots", &mut self.todo_slots.iter().cloned());
        section("Unused dimensions", &mut self.unused_dimensions.iter().cloned());
        section("Unused values", &mut self.unused_values.iter().cloned());
        out
    }
}

pub fn todo_report(graph: &DecisionGraph, space: &PolicySpace, inferencers: &[InferencerDef]) -> TodoReport {
    let mut report = TodoReport::default();
    let mut written: BTreeSet<usize> = BTreeSet::new();
    // (slot id, value name)
    let mut used: BTreeSet<(usize, String)> = BTreeSet::new();

    let mut note_use = |slot: &str, value: &str, write: bool, written: &mut BTreeSet<usize>| {
        let Some(id) = space.find_slot(slot) else { return };
        if space.slot(id).value_index(value).is_none() {
            return;
        }
        used.insert((id, String::from(value)));
        if write {
            let dim = match space.slot(id).kind {
                SlotKind::Atomic => space.atomic_dimension(id),
                SlotKind::Aggregate => space.member_dimension(id, value),
                _ => None,
            };
            written.extend(dim);
        }
    };

    for node in graph.nodes() {
        match &node.kind {
            NodeKind::Todo { note } => report.todo_nodes.push(TodoEntry {
                node: node.id.clone(),
                note: note.clone(),
                file: String::from(graph.file_name(node.pos)),
                line: node.pos.line,
                column: node.pos.column,
            }),
            NodeKind::Set { assignments } => {
                for (slot, value) in assignments.iter().flat_map(|a| a.pairs()) {
                    note_use(slot, value, true, &mut written);
                }
            }
            NodeKind::Consider { slot, options, .. } => {
                for o in options {
                    note_use(slot, &o.value, false, &mut written);
                }
            }
            _ => {}
        }
    }
    for inf in inferencers {
        for row in &inf.rows {
            for (slot, value) in row.anchor.iter().flat_map(|a| a.pairs()) {
                note_use(slot, value, false, &mut written);
            }
            note_use(&inf.target, &row.value, true, &mut written);
        }
    }

    for (id, slot) in space.slots().iter().enumerate() {
        if slot.kind == SlotKind::Todo {
            report.todo_slots.push(String::from(space.slot_path(id)));
        }
    }
    for (i, dim) in space.dimensions().iter().enumerate() {
        if !written.contains(&i) {
            report.unused_dimensions.push(dim.path.clone());
        }
        let slot = space.slot(dim.slot);
        let values: Vec<&str> = match dim.kind {
            DimensionKind::Atomic => slot.values.iter().map(|v| v.name.as_str()).collect(),
            DimensionKind::Member(m) => alloc::vec![slot.values[m].name.as_str()],
        };
        for v in values {
            if !used.contains(&(dim.slot, String::from(v))) {
                report
                    .unused_values
                    .push(format!("{}/{v}", space.slot_path(dim.slot)));
            }
        }
    }
    report
}
