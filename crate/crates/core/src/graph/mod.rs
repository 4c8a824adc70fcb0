//! Decision-graph IR.
//!
//! Nodes live in an arena in source pre-order. A body (answer branch, option,
//! section or part contents) is a chain of nodes linked by `successor`; the last
//! node of a body has no successor and control returns to the enclosing node
//! named by `parent`. Parts are declarations: they never appear in a successor
//! chain and are entered only through `[call]`.

mod dot;
mod report;
mod validate;

pub use dot::{export_dot, DotOptions};
pub use report::{todo_report, TodoEntry, TodoReport};
pub use validate::validate;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::diag::SourcePos;

pub type NodeIdx = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Assignment {
    /// `Slot=value`
    Atomic { slot: String, value: String },
    /// `Slot+=v1, v2`
    Aggregate { slot: String, values: Vec<String> },
}

impl Assignment {
    pub fn slot(&self) -> &str {
        match self {
            Assignment::Atomic { slot, .. } | Assignment::Aggregate { slot, .. } => slot,
        }
    }

    /// `(slot, value)` pairs in the order written.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        let (slot, values): (&str, &[String]) = match self {
            Assignment::Atomic { slot, value } => (slot, core::slice::from_ref(value)),
            Assignment::Aggregate { slot, values } => (slot, values),
        };
        values.iter().map(move |v| (slot, v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub key: String,
    pub body: Option<NodeIdx>,
    /// Added for the missing half of a yes/no question; not written in source.
    pub implicit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsiderOption {
    pub value: String,
    pub body: Option<NodeIdx>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Ask {
        text: String,
        answers: Vec<Answer>,
    },
    Set {
        assignments: Vec<Assignment>,
    },
    Call {
        target: String,
    },
    Consider {
        slot: String,
        options: Vec<ConsiderOption>,
        /// `Some(body)` when an `{else: ...}` block is present.
        otherwise: Option<Option<NodeIdx>>,
    },
    Section {
        title: String,
        body: Option<NodeIdx>,
    },
    Part {
        body: Option<NodeIdx>,
    },
    End,
    Continue,
    Todo {
        note: String,
    },
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Ask { .. } => "ask",
            NodeKind::Set { .. } => "set",
            NodeKind::Call { .. } => "call",
            NodeKind::Consider { .. } => "consider",
            NodeKind::Section { .. } => "section",
            NodeKind::Part { .. } => "part",
            NodeKind::End => "end",
            NodeKind::Continue => "continue",
            NodeKind::Todo { .. } => "todo",
        }
    }

    /// Heads of the bodies nested directly in this node, in source order.
    pub fn bodies(&self) -> Vec<Option<NodeIdx>> {
        match self {
            NodeKind::Ask { answers, .. } => answers.iter().map(|a| a.body).collect(),
            NodeKind::Consider { options, otherwise, .. } => options
                .iter()
                .map(|o| o.body)
                .chain(otherwise.iter().copied())
                .collect(),
            NodeKind::Section { body, .. } | NodeKind::Part { body } => alloc::vec![*body],
            _ => Vec::new(),
        }
    }
}

/// One node. Equality ignores the source position.
#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub explicit_id: bool,
    pub kind: NodeKind,
    pub successor: Option<NodeIdx>,
    pub parent: Option<NodeIdx>,
    pub pos: SourcePos,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.explicit_id == other.explicit_id
            && self.kind == other.kind
            && self.successor == other.successor
            && self.parent == other.parent
    }
}

impl Eq for Node {}

#[derive(Debug, Clone)]
pub struct DecisionGraph {
    pub(crate) files: Vec<String>,
    pub(crate) nodes: Vec<Node>,
    /// Top-level items of each file in source order, parts included.
    pub(crate) file_items: Vec<Vec<NodeIdx>>,
    pub(crate) entry: Option<NodeIdx>,
    pub(crate) by_id: BTreeMap<String, NodeIdx>,
}

impl PartialEq for DecisionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.file_items == other.file_items && self.entry == other.entry
    }
}

impl Eq for DecisionGraph {}

impl DecisionGraph {
    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn file_name(&self, pos: SourcePos) -> &str {
        self.files.get(pos.file as usize).map_or("<unknown>", String::as_str)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: NodeIdx) -> &Node {
        &self.nodes[idx]
    }

    pub fn entry(&self) -> Option<NodeIdx> {
        self.entry
    }

    pub fn file_items(&self) -> &[Vec<NodeIdx>] {
        &self.file_items
    }

    pub fn find(&self, id: &str) -> Option<NodeIdx> {
        self.by_id.get(id).copied()
    }

    /// The part node a `[call]` target names, if it exists and is a part.
    pub fn part(&self, id: &str) -> Option<NodeIdx> {
        self.find(id)
            .filter(|&i| matches!(self.nodes[i].kind, NodeKind::Part { .. }))
    }

    /// Iterates a body chain starting at `head`.
    pub fn chain(&self, head: Option<NodeIdx>) -> impl Iterator<Item = NodeIdx> + '_ {
        core::iter::successors(head, move |&i| self.nodes[i].successor)
    }

    /// Innermost section lexically enclosing `idx` within the same part.
    pub fn enclosing_section(&self, idx: NodeIdx) -> Option<NodeIdx> {
        let mut cur = self.nodes[idx].parent;
        while let Some(p) = cur {
            match self.nodes[p].kind {
                NodeKind::Section { .. } => return Some(p),
                NodeKind::Part { .. } => return None,
                _ => cur = self.nodes[p].parent,
            }
        }
        None
    }

    /// Part containing `idx`, if any.
    pub fn enclosing_part(&self, idx: NodeIdx) -> Option<NodeIdx> {
        let mut cur = self.nodes[idx].parent;
        while let Some(p) = cur {
            if matches!(self.nodes[p].kind, NodeKind::Part { .. }) {
                return Some(p);
            }
            cur = self.nodes[p].parent;
        }
        None
    }

    pub fn ask_nodes(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i].kind, NodeKind::Ask { .. }))
    }
}
