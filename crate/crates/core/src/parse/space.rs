use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::cursor::{Cursor, PResult};
use crate::diag::Diagnostic;
use crate::space::{PolicySpace, SlotDefinition, SlotKind, SlotRef, ValueDefinition};

#[derive(Clone, Copy)]
enum RemarkTarget {
    Slot,
    Value(usize),
    Nothing,
}

struct SpaceParser<'a> {
    cur: Cursor<'a>,
    target: RemarkTarget,
}

impl<'a> SpaceParser<'a> {
    /// Skips whitespace, comments and remarks; remarks attach to the last name read.
    fn trivia(&mut self, slot: &mut Option<SlotDefinition>) -> PResult<()> {
        loop {
            self.cur.skip_trivia();
            if !self.cur.starts_with("<--") {
                return Ok(());
            }
            let pos = self.cur.pos();
            self.cur.eat("<--");
            let mut text = String::new();
            while !matches!(self.cur.peek(), None | Some('\n')) {
                text.push(self.cur.bump().unwrap());
            }
            let text = text.trim();
            let slot = slot.as_mut();
            let dest = match (self.target, slot) {
                (RemarkTarget::Slot, Some(s)) => &mut s.remark,
                (RemarkTarget::Value(i), Some(s)) => &mut s.values[i].remark,
                _ => return Err(self.cur.error(pos, "remark does not follow a slot or value name")),
            };
            match dest {
                Some(existing) => {
                    existing.push(' ');
                    existing.push_str(text);
                }
                None => *dest = Some(String::from(text)),
            }
        }
    }

    fn statement(&mut self) -> PResult<SlotDefinition> {
        let (name, pos) = self.cur.ident("slot name")?;
        let mut slot = Some(SlotDefinition {
            name,
            kind: SlotKind::Todo,
            values: Vec::new(),
            children: Vec::new(),
            remark: None,
            pos,
        });
        self.target = RemarkTarget::Slot;
        self.trivia(&mut slot)?;
        self.cur.expect(":")?;
        self.trivia(&mut slot)?;
        let (kw, kw_pos) = self.cur.ident("`consists of`, `one of`, `some of` or `TODO`")?;
        let kind = match kw.as_str() {
            "TODO" => SlotKind::Todo,
            "consists" | "one" | "some" => {
                self.trivia(&mut slot)?;
                let (of, of_pos) = self.cur.ident("`of`")?;
                if of != "of" {
                    return Err(self.cur.error(of_pos, format!("expected `of` after `{kw}`")));
                }
                match kw.as_str() {
                    "consists" => SlotKind::Compound,
                    "one" => SlotKind::Atomic,
                    _ => SlotKind::Aggregate,
                }
            }
            other => {
                return Err(self
                    .cur
                    .error(kw_pos, format!("unknown slot kind `{other}`")))
            }
        };
        slot.as_mut().unwrap().kind = kind;
        if kind != SlotKind::Todo {
            loop {
                self.trivia(&mut slot)?;
                let (item, item_pos) = self.cur.ident(match kind {
                    SlotKind::Compound => "slot name",
                    _ => "value name",
                })?;
                let s = slot.as_mut().unwrap();
                if kind == SlotKind::Compound {
                    s.children.push(SlotRef { name: item, pos: item_pos });
                    self.target = RemarkTarget::Nothing;
                } else {
                    s.values.push(ValueDefinition {
                        name: item,
                        remark: None,
                        pos: item_pos,
                    });
                    self.target = RemarkTarget::Value(s.values.len() - 1);
                }
                self.trivia(&mut slot)?;
                if !self.cur.eat(",") {
                    break;
                }
            }
        }
        self.trivia(&mut slot)?;
        self.cur.expect(".")?;
        // a remark may trail the terminating period on the same line
        self.trivia(&mut slot)?;
        self.target = RemarkTarget::Nothing;
        Ok(slot.unwrap())
    }
}

/// Parses a `.ps` policy-space definition.
pub fn parse_policy_space(file: &str, source: &str) -> Result<PolicySpace, Vec<Diagnostic>> {
    let mut p = SpaceParser {
        cur: Cursor::new(0, file, source),
        target: RemarkTarget::Nothing,
    };
    let mut slots = Vec::new();
    let mut none = None;
    loop {
        p.trivia(&mut none).map_err(|d| vec![d])?;
        if p.cur.at_end() {
            break;
        }
        slots.push(p.statement().map_err(|d| vec![d])?);
    }
    PolicySpace::new(file, slots)
}
