use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::cursor::{Cursor, PResult};
use crate::diag::{Diagnostic, SourcePos};
use crate::graph::{Answer, Assignment, ConsiderOption, DecisionGraph, Node, NodeIdx, NodeKind};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Close {
    Eof,
    Bracket,
    Brace,
    PartEnd,
}

impl Close {
    fn token(self) -> &'static str {
        match self {
            Close::Eof => "",
            Close::Bracket => "]",
            Close::Brace => "}",
            Close::PartEnd => "--]",
        }
    }
}

struct GraphParser<'a, 'n> {
    cur: Cursor<'a>,
    nodes: &'n mut Vec<Node>,
}

impl GraphParser<'_, '_> {
    fn alloc(&mut self, pos: SourcePos, parent: Option<NodeIdx>) -> NodeIdx {
        self.nodes.push(Node {
            id: String::new(),
            explicit_id: false,
            kind: NodeKind::End,
            successor: None,
            parent,
            pos,
        });
        self.nodes.len() - 1
    }

    /// Parses nodes until `close` (not consumed); links the non-part items.
    fn sequence(
        &mut self,
        parent: Option<NodeIdx>,
        close: Close,
        opened: SourcePos,
        prev: &mut Option<NodeIdx>,
    ) -> PResult<Vec<NodeIdx>> {
        let mut items = Vec::new();
        loop {
            self.cur.skip_trivia();
            if self.cur.at_end() {
                if close == Close::Eof {
                    return Ok(items);
                }
                return Err(self.cur.error(
                    opened,
                    format!("unbalanced brackets: missing `{}` for this node", close.token()),
                ));
            }
            if close != Close::Eof && self.cur.starts_with(close.token()) {
                return Ok(items);
            }
            if self.cur.peek() != Some('[') {
                let c = self.cur.peek().unwrap();
                return Err(self.cur.error(self.cur.pos(), format!("unexpected `{c}`; expected a node")));
            }
            let idx = self.node(parent)?;
            if !matches!(self.nodes[idx].kind, NodeKind::Part { .. }) {
                if let Some(p) = *prev {
                    self.nodes[p].successor = Some(idx);
                }
                *prev = Some(idx);
            }
            items.push(idx);
        }
    }

    fn body(&mut self, parent: NodeIdx, close: Close, opened: SourcePos) -> PResult<Option<NodeIdx>> {
        let mut prev = None;
        let items = self.sequence(Some(parent), close, opened, &mut prev)?;
        Ok(items.first().copied())
    }

    /// `{name:` with the block name checked.
    fn open_block(&mut self, name: &str) -> PResult<SourcePos> {
        self.cur.skip_trivia();
        let pos = self.cur.pos();
        self.cur.expect("{")?;
        let (got, got_pos) = self.cur.ident(&format!("`{name}`"))?;
        if got != name {
            return Err(self.cur.error(got_pos, format!("expected `{{{name}:`, found `{{{got}`")));
        }
        self.cur.expect(":")?;
        Ok(pos)
    }

    fn text_block(&mut self, name: &str) -> PResult<String> {
        let pos = self.open_block(name)?;
        let text = self.cur.text_until('}', pos)?;
        self.cur.expect("}")?;
        Ok(text)
    }

    fn peek_block(&mut self, name: &str) -> bool {
        self.cur.skip_trivia();
        let rest = self.cur.rest();
        rest.strip_prefix('{')
            .map(str::trim_start)
            .is_some_and(|r| r.starts_with(name) && r[name.len()..].trim_start().starts_with(':'))
    }

    fn node(&mut self, parent: Option<NodeIdx>) -> PResult<NodeIdx> {
        let open = self.cur.pos();
        self.cur.expect("[")?;
        if self.cur.eat("-->") {
            if parent.is_some() {
                return Err(self.cur.error(open, "parts may only be defined at the top level of a file"));
            }
            let (id, _) = self.cur.ident("part id")?;
            self.cur.expect("<")?;
            let idx = self.alloc(open, parent);
            self.nodes[idx].id = id;
            self.nodes[idx].explicit_id = true;
            let body = self.body(idx, Close::PartEnd, open)?;
            self.cur.expect("--]")?;
            self.nodes[idx].kind = NodeKind::Part { body };
            return Ok(idx);
        }

        let idx = self.alloc(open, parent);
        self.cur.skip_trivia();
        if self.cur.eat(">") {
            let (id, _) = self.cur.ident("node id")?;
            self.cur.expect("<")?;
            self.nodes[idx].id = id;
            self.nodes[idx].explicit_id = true;
        }
        let (kw, kw_pos) = self.cur.ident("node type")?;
        let kind = match kw.as_str() {
            "end" => NodeKind::End,
            "continue" => NodeKind::Continue,
            "ask" => {
                self.cur.expect(":")?;
                self.ask(idx)?
            }
            "set" => {
                self.cur.expect(":")?;
                NodeKind::Set {
                    assignments: self.assignments()?,
                }
            }
            "call" => {
                self.cur.expect(":")?;
                let (target, _) = self.cur.ident("part id")?;
                NodeKind::Call { target }
            }
            "consider" => {
                self.cur.expect(":")?;
                self.consider(idx)?
            }
            "section" => {
                self.cur.expect(":")?;
                let title = self.text_block("title")?;
                let body = self.body(idx, Close::Bracket, open)?;
                NodeKind::Section { title, body }
            }
            "todo" => {
                self.cur.expect(":")?;
                let note = self.cur.text_until(']', open)?;
                NodeKind::Todo { note }
            }
            other => return Err(self.cur.error(kw_pos, format!("unknown node type `{other}`"))),
        };
        self.cur.expect("]").map_err(|mut d| {
            d.message = format!("{} (closing `[{kw}` opened at {}:{})", d.message, open.line, open.column);
            d
        })?;
        self.nodes[idx].kind = kind;
        Ok(idx)
    }

    fn ask(&mut self, idx: NodeIdx) -> PResult<NodeKind> {
        let text = self.text_block("text")?;
        let block = self.open_block("answers")?;
        let mut answers: Vec<Answer> = Vec::new();
        loop {
            self.cur.skip_trivia();
            if self.cur.eat("}") {
                break;
            }
            let apos = self.cur.pos();
            if !self.cur.eat("{") {
                return Err(self.cur.error(apos, "expected `{answer: ...}` or `}`"));
            }
            let key = self.cur.text_until(':', apos)?;
            if key.is_empty() || key.contains(['{', '}', '[', ']']) {
                return Err(self.cur.error(apos, format!("invalid answer key `{key}`")));
            }
            if answers.iter().any(|a| a.key == key) {
                return Err(self.cur.error(apos, format!("duplicate answer `{key}`")));
            }
            self.cur.expect(":")?;
            let body = self.body(idx, Close::Brace, apos)?;
            self.cur.expect("}")?;
            answers.push(Answer {
                key,
                body,
                implicit: false,
            });
            if self.cur.at_end() {
                return Err(self.cur.error(block, "unbalanced brackets: missing `}` for answers"));
            }
        }
        if answers.is_empty() {
            return Err(self.cur.error(block, "ask node needs at least one answer"));
        }
        add_implicit_yes_no(&mut answers);
        Ok(NodeKind::Ask { text, answers })
    }

    fn assignments(&mut self) -> PResult<Vec<Assignment>> {
        let mut out = Vec::new();
        loop {
            let (slot, _) = self.cur.ident_with("slot name", &['/'])?;
            self.cur.skip_trivia();
            if self.cur.eat("+=") {
                let mut values = Vec::new();
                loop {
                    values.push(self.cur.ident("value name")?.0);
                    self.cur.skip_trivia();
                    if !self.cur.eat(",") {
                        break;
                    }
                }
                out.push(Assignment::Aggregate { slot, values });
            } else {
                self.cur.expect("=")?;
                let (value, _) = self.cur.ident("value name")?;
                out.push(Assignment::Atomic { slot, value });
            }
            self.cur.skip_trivia();
            if !self.cur.eat(";") {
                return Ok(out);
            }
            // tolerate a trailing `;`
            self.cur.skip_trivia();
            if self.cur.starts_with("]") {
                return Ok(out);
            }
        }
    }

    fn consider(&mut self, idx: NodeIdx) -> PResult<NodeKind> {
        self.open_block("slot")?;
        let (slot, _) = self.cur.ident_with("slot name", &['/'])?;
        self.cur.expect("}")?;
        let mut options: Vec<ConsiderOption> = Vec::new();
        if self.peek_block("options") {
            self.open_block("options")?;
            loop {
                self.cur.skip_trivia();
                if self.cur.eat("}") {
                    break;
                }
                let opos = self.cur.pos();
                self.cur.expect("{")?;
                let (value, vpos) = self.cur.ident("option value")?;
                if options.iter().any(|o| o.value == value) {
                    return Err(self.cur.error(vpos, format!("duplicate option `{value}`")));
                }
                self.cur.expect(":")?;
                let body = self.body(idx, Close::Brace, opos)?;
                self.cur.expect("}")?;
                options.push(ConsiderOption { value, body });
            }
        }
        let otherwise = if self.peek_block("else") {
            let epos = self.open_block("else")?;
            let body = self.body(idx, Close::Brace, epos)?;
            self.cur.expect("}")?;
            Some(body)
        } else {
            None
        };
        Ok(NodeKind::Consider {
            slot,
            options,
            otherwise,
        })
    }
}

/// A question answered only by `yes` or only by `no` gains the other answer
/// with an empty body; `yes` is listed first.
fn add_implicit_yes_no(answers: &mut Vec<Answer>) {
    let keys: Vec<&str> = answers.iter().map(|a| a.key.as_str()).collect();
    let missing = match keys.as_slice() {
        ["yes"] => "no",
        ["no"] => "yes",
        _ => return,
    };
    let implicit = Answer {
        key: missing.to_string(),
        body: None,
        implicit: true,
    };
    if missing == "yes" {
        answers.insert(0, implicit);
    } else {
        answers.push(implicit);
    }
}

/// Parses the `.dg` files of one model, in manifest order, into one graph.
///
/// `sources` holds `(file name, text)` pairs. Top-level node sequences are
/// concatenated across files; nodes without an explicit id get `_n<ordinal>`
/// where the ordinal is the node's 1-based position in source pre-order.
pub fn parse_decision_graph(sources: &[(&str, &str)]) -> Result<DecisionGraph, Vec<Diagnostic>> {
    let mut nodes = Vec::new();
    let mut file_items = Vec::new();
    let mut diags = Vec::new();
    let mut prev_top: Option<NodeIdx> = None;

    for (i, (name, text)) in sources.iter().enumerate() {
        let mut p = GraphParser {
            cur: Cursor::new(i as u32, name, text),
            nodes: &mut nodes,
        };
        let start = SourcePos::new(i as u32, 1, 1);
        match p.sequence(None, Close::Eof, start, &mut prev_top) {
            Ok(items) => file_items.push(items),
            Err(d) => {
                diags.push(d);
                file_items.push(Vec::new());
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    if sources.is_empty() {
        return Err(alloc::vec![Diagnostic::error(
            "<graph>",
            SourcePos::new(0, 1, 1),
            "a decision graph needs at least one source file",
        )]);
    }

    for (i, n) in nodes.iter_mut().enumerate() {
        if !n.explicit_id {
            n.id = format!("_n{}", i + 1);
        }
    }
    let mut by_id: BTreeMap<String, NodeIdx> = BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if let Some(&first) = by_id.get(&n.id) {
            let fp = nodes[first].pos;
            diags.push(Diagnostic::error(
                sources[n.pos.file as usize].0,
                n.pos,
                format!(
                    "duplicate node id `{}` (first defined at {}:{}:{})",
                    n.id, sources[fp.file as usize].0, fp.line, fp.column
                ),
            ));
        } else {
            by_id.insert(n.id.clone(), i);
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let entry = file_items
        .iter()
        .flatten()
        .copied()
        .find(|&i| !matches!(nodes[i].kind, NodeKind::Part { .. }));
    Ok(DecisionGraph {
        files: sources.iter().map(|(n, _)| n.to_string()).collect(),
        nodes,
        file_items,
        entry,
        by_id,
    })
}
