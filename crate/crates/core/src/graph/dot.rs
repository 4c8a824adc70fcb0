use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{DecisionGraph, NodeIdx, NodeKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DotOptions {
    pub section_clusters: bool,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Where control goes once `idx` completes normally; `None` when it leaves
/// the graph (interview end or part return).
fn next_after(g: &DecisionGraph, idx: NodeIdx) -> Option<NodeIdx> {
    let mut cur = idx;
    loop {
        if let Some(s) = g.nodes[cur].successor {
            return Some(s);
        }
        let p = g.nodes[cur].parent?;
        if matches!(g.nodes[p].kind, NodeKind::Part { .. }) {
            return None;
        }
        cur = p;
    }
}

struct Edge<'a> {
    to: NodeIdx,
    label: Option<&'a str>,
    dashed: bool,
}

fn edges(g: &DecisionGraph, i: NodeIdx) -> Vec<Edge<'_>> {
    let mut out = Vec::new();
    let target = |body: Option<NodeIdx>| body.or_else(|| next_after(g, i));
    match &g.nodes[i].kind {
        NodeKind::Ask { answers, .. } => {
            for a in answers {
                if let Some(to) = target(a.body) {
                    out.push(Edge { to, label: Some(&a.key), dashed: false });
                }
            }
        }
        NodeKind::Consider { options, otherwise, .. } => {
            for o in options {
                if let Some(to) = target(o.body) {
                    out.push(Edge { to, label: Some(&o.value), dashed: false });
                }
            }
            if let Some(to) = target(otherwise.unwrap_or(None)) {
                out.push(Edge { to, label: Some("else"), dashed: false });
            }
        }
        NodeKind::Section { body, .. } | NodeKind::Part { body } => {
            let t = if matches!(g.nodes[i].kind, NodeKind::Part { .. }) { *body } else { target(*body) };
            if let Some(to) = t {
                out.push(Edge { to, label: None, dashed: false });
            }
        }
        NodeKind::Call { target: part } => {
            if let Some(p) = g.part(part) {
                out.push(Edge { to: p, label: Some("call"), dashed: true });
            }
            if let Some(to) = next_after(g, i) {
                out.push(Edge { to, label: None, dashed: false });
            }
        }
        NodeKind::Continue => {
            if let Some(to) = g.enclosing_section(i).and_then(|s| next_after(g, s)) {
                out.push(Edge { to, label: Some("continue"), dashed: true });
            }
        }
        NodeKind::End => {}
        NodeKind::Set { .. } | NodeKind::Todo { .. } => {
            if let Some(to) = next_after(g, i) {
                out.push(Edge { to, label: None, dashed: false });
            }
        }
    }
    out
}

fn write_cluster(g: &DecisionGraph, out: &mut String, section: NodeIdx, members: &[Vec<NodeIdx>], depth: usize) {
    let pad = "  ".repeat(depth);
    let NodeKind::Section { title, .. } = &g.nodes[section].kind else { return };
    let _ = writeln!(out, "{pad}subgraph {} {{", quote(&alloc::format!("cluster_{}", g.nodes[section].id)));
    let _ = writeln!(out, "{pad}  label={};", quote(title));
    let _ = writeln!(out, "{pad}  {};", quote(&g.nodes[section].id));
    for &m in &members[section] {
        if matches!(g.nodes[m].kind, NodeKind::Section { .. }) {
            write_cluster(g, out, m, members, depth + 1);
        } else {
            let _ = writeln!(out, "{pad}  {};", quote(&g.nodes[m].id));
        }
    }
    let _ = writeln!(out, "{pad}}}");
}

/// Renders the graph as a GraphViz digraph. Nodes and edges are emitted in
/// node-id order, so the output is a pure function of the graph.
pub fn export_dot(graph: &DecisionGraph, options: DotOptions) -> String {
    let mut order: Vec<NodeIdx> = (0..graph.nodes.len()).collect();
    order.sort_by(|&a, &b| graph.nodes[a].id.cmp(&graph.nodes[b].id));

    let mut out = String::from("digraph decision_graph {\n  node [shape=box];\n");
    for &i in &order {
        let n = &graph.nodes[i];
        let shape = match n.kind {
            NodeKind::Ask { .. } => "ellipse",
            NodeKind::Consider { .. } => "diamond",
            NodeKind::End | NodeKind::Continue => "circle",
            NodeKind::Todo { .. } => "note",
            _ => "box",
        };
        let label = alloc::format!("{}\n{}", n.id, n.kind.name());
        let _ = writeln!(out, "  {} [label={}, shape={shape}];", quote(&n.id), quote(&label));
    }
    if options.section_clusters {
        // direct members of each section, in id order
        let mut members: Vec<Vec<NodeIdx>> = alloc::vec![Vec::new(); graph.nodes.len()];
        for &i in &order {
            if let Some(s) = graph.enclosing_section(i) {
                members[s].push(i);
            }
        }
        for &i in &order {
            if matches!(graph.nodes[i].kind, NodeKind::Section { .. }) && graph.enclosing_section(i).is_none() {
                write_cluster(graph, &mut out, i, &members, 1);
            }
        }
    }
    for &i in &order {
        for e in edges(graph, i) {
            let mut attrs = Vec::new();
            if let Some(l) = e.label {
                attrs.push(alloc::format!("label={}", quote(l)));
            }
            if e.dashed {
                attrs.push(String::from("style=dashed"));
            }
            let _ = write!(out, "  {} -> {}", quote(&graph.nodes[i].id), quote(&graph.nodes[e.to].id));
            if !attrs.is_empty() {
                let _ = write!(out, " [{}]", attrs.join(", "));
            }
            out.push_str(";\n");
        }
    }
    out.push_str("}\n");
    out
}
