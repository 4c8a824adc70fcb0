use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::cursor::{Cursor, PResult};
use crate::diag::Diagnostic;
use crate::graph::Assignment;
use crate::inference::{InferenceMode, InferencerDef, RowDef};

fn term(cur: &mut Cursor<'_>) -> PResult<Assignment> {
    let (slot, _) = cur.ident_with("slot name", &['/'])?;
    cur.skip_trivia();
    if cur.eat("+=") {
        let mut values = Vec::new();
        loop {
            values.push(cur.ident("value name")?.0);
            cur.skip_trivia();
            // a `,` followed by another name continues the member list
            if !cur.eat(",") {
                break;
            }
        }
        Ok(Assignment::Aggregate { slot, values })
    } else {
        cur.expect("=")?;
        let (value, _) = cur.ident("value name")?;
        Ok(Assignment::Atomic { slot, value })
    }
}

fn row(cur: &mut Cursor<'_>) -> PResult<RowDef> {
    let pos = cur.pos();
    cur.expect("[")?;
    let mut anchor = Vec::new();
    loop {
        anchor.push(term(cur)?);
        cur.skip_trivia();
        if cur.eat(";") {
            continue;
        }
        break;
    }
    cur.expect("->")?;
    let (value, _) = cur.ident("inferred value")?;
    cur.expect("]")?;
    Ok(RowDef { anchor, value, pos })
}

fn inferencer(cur: &mut Cursor<'_>) -> PResult<InferencerDef> {
    cur.skip_trivia();
    let pos = cur.pos();
    cur.expect("[")?;
    let (target, _) = cur.ident_with("target slot", &['/'])?;
    cur.expect(":")?;
    let (mode, mode_pos) = cur.ident("`support` or `comply`")?;
    let mode = match mode.as_str() {
        "support" => InferenceMode::Support,
        "comply" => InferenceMode::Comply,
        other => return Err(cur.error(mode_pos, format!("unknown inference mode `{other}`"))),
    };
    let mut rows = Vec::new();
    loop {
        cur.skip_trivia();
        match cur.peek() {
            Some('[') => rows.push(row(cur)?),
            Some(']') => {
                cur.bump();
                break;
            }
            None => return Err(cur.error(pos, "unbalanced brackets: missing `]` for this inferencer")),
            Some(c) => return Err(cur.error(cur.pos(), format!("unexpected `{c}`; expected a row"))),
        }
    }
    if rows.is_empty() {
        return Err(cur.error(pos, format!("inferencer for `{target}` has no rows")));
    }
    Ok(InferencerDef {
        target,
        mode,
        rows,
        pos,
    })
}

/// Parses a `.vi` file. Slot and value names are checked later, against the space.
pub fn parse_value_inferencers(file: &str, source: &str) -> Result<Vec<InferencerDef>, Vec<Diagnostic>> {
    let mut cur = Cursor::new(0, file, source);
    let mut out = Vec::new();
    loop {
        cur.skip_trivia();
        if cur.at_end() {
            return Ok(out);
        }
        out.push(inferencer(&mut cur).map_err(|d| vec![d])?);
    }
}
