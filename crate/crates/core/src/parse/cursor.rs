use alloc::format;
use alloc::string::String;

use crate::diag::{Diagnostic, SourcePos};

/// Character cursor tracking 1-based line and column.
pub(crate) struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    column: u32,
    file: u32,
    name: &'a str,
}

pub(crate) type PResult<T> = Result<T, Diagnostic>;

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

impl<'a> Cursor<'a> {
    pub fn new(file: u32, name: &'a str, src: &'a str) -> Self {
        let src = src.strip_prefix('\u{feff}').unwrap_or(src);
        Cursor {
            src,
            offset: 0,
            line: 1,
            column: 1,
            file,
            name,
        }
    }

    pub fn pos(&self) -> SourcePos {
        SourcePos::new(self.file, self.line, self.column)
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    pub fn at_end(&self) -> bool {
        self.offset >= self.src.len()
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    pub fn eat(&mut self, s: &str) -> bool {
        if self.starts_with(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    pub fn error(&self, pos: SourcePos, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(self.name, pos, msg)
    }

    pub fn expect(&mut self, s: &str) -> PResult<()> {
        self.skip_trivia();
        if self.eat(s) {
            Ok(())
        } else {
            let found = self.peek().map_or_else(|| String::from("end of file"), |c| format!("`{c}`"));
            Err(self.error(self.pos(), format!("expected `{s}`, found {found}")))
        }
    }

    pub fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    /// Skips whitespace and `#` line comments.
    pub fn skip_trivia(&mut self) {
        loop {
            self.skip_ws();
            if self.peek() == Some('#') {
                while !matches!(self.peek(), None | Some('\n')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    /// Reads an identifier after skipping trivia. `extra` lists additional
    /// allowed characters (e.g. `/` for slot paths).
    pub fn ident_with(&mut self, what: &str, extra: &[char]) -> PResult<(String, SourcePos)> {
        self.skip_trivia();
        let pos = self.pos();
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if is_ident_char(c) || extra.contains(&c) {
                // `-->` and `->` are punctuation, never part of a name
                if c == '-' && (self.starts_with("->") || self.starts_with("--]")) {
                    break;
                }
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if out.is_empty() {
            let found = self.peek().map_or_else(|| String::from("end of file"), |c| format!("`{c}`"));
            return Err(self.error(pos, format!("expected {what}, found {found}")));
        }
        Ok((out, pos))
    }

    pub fn ident(&mut self, what: &str) -> PResult<(String, SourcePos)> {
        self.ident_with(what, &[])
    }

    /// Reads free text up to (not including) an unescaped `stop` character,
    /// collapsing whitespace runs. `\` escapes the next character.
    pub fn text_until(&mut self, stop: char, opened: SourcePos) -> PResult<String> {
        let mut out = String::new();
        let mut pending_space = false;
        loop {
            match self.peek() {
                None => return Err(self.error(opened, format!("unterminated text; missing `{stop}`"))),
                Some(c) if c == stop => break,
                Some('\\') => {
                    self.bump();
                    let Some(c) = self.bump() else {
                        return Err(self.error(opened, "dangling escape at end of file"));
                    };
                    if pending_space && !out.is_empty() {
                        out.push(' ');
                    }
                    pending_space = false;
                    out.push(c);
                }
                Some(c) if c.is_whitespace() => {
                    pending_space = true;
                    self.bump();
                }
                Some(c) => {
                    if pending_space && !out.is_empty() {
                        out.push(' ');
                    }
                    pending_space = false;
                    out.push(c);
                    self.bump();
                }
            }
        }
        Ok(out)
    }
}

/// Escapes text so that `Cursor::text_until` reads it back unchanged.
pub(crate) fn escape_text(s: &str, specials: &[char]) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c == '\\' || specials.contains(&c) {
            out.push('\\');
        }
        out.push(c);
    }
    out
}
