//! Localization packages: per-locale texts for the model, its ask nodes,
//! answers and space entities, with fallbacks to the model's own texts.
//!
//! File formats (the std crate reads them from `languages/<locale>/`):
//!
//! * `model.md`: first `# ` heading is the title, the rest is the about text.
//! * `nodes/<node-id>.md`: first line is the question, the rest an elaboration.
//! * `answers.txt`: `key: display text` lines; blank lines and `#` comments skipped.
//! * `space.md`: `## <slot or slot/value> | <name>` headings (any heading level).
//!   The first paragraph below a heading is the tooltip, the remainder the long text.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Diagnostics, SourcePos};
use crate::graph::NodeKind;
use crate::model::Model;

/// Raw texts of one locale, as `(file name, text)` pairs.
#[derive(Debug, Clone, Default)]
pub struct PackageFiles {
    pub locale: String,
    pub model_md: Option<(String, String)>,
    /// `(node id, file name, text)`
    pub nodes: Vec<(String, String, String)>,
    pub answers: Option<(String, String)>,
    pub space_md: Option<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeText {
    pub question: String,
    pub elaboration: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityText {
    pub name: Option<String>,
    pub tooltip: Option<String>,
    pub long_text: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Coverage {
    pub asks_localized: usize,
    pub asks_total: usize,
    pub answers_localized: usize,
    pub answers_total: usize,
    pub entities_localized: usize,
    pub entities_total: usize,
}

impl Coverage {
    pub fn is_complete(&self) -> bool {
        self.asks_localized == self.asks_total
            && self.answers_localized == self.answers_total
            && self.entities_localized == self.entities_total
    }
}

/// What to localize. Entities are slot references (`Plan`, `Root/Plan`) or
/// values (`Plan/L1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextKey<'a> {
    Node(&'a str),
    Answer(&'a str),
    Entity(&'a str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextLevel {
    Name,
    Tooltip,
    Long,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocalizeError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown answer `{0}`")]
    UnknownAnswer(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizationPackage {
    pub locale: String,
    pub title: Option<String>,
    pub about: Option<String>,
    pub nodes: BTreeMap<String, NodeText>,
    pub answers: BTreeMap<String, String>,
    /// Keyed by canonical path: `Root/Plan` or `Root/Plan/L1`.
    pub entities: BTreeMap<String, EntityText>,
    pub coverage: Coverage,
    /// Entries dropped because they name nothing in the model.
    pub warnings: Vec<Diagnostic>,
}

/// A resolved entity: slot id and optional value index.
type EntityRef = (usize, Option<usize>);

fn resolve_entity(model: &Model, path: &str) -> Option<EntityRef> {
    let space = model.space();
    if let Some(id) = space.find_slot(path) {
        return Some((id, None));
    }
    let (slot, value) = path.rsplit_once('/')?;
    let id = space.find_slot(slot)?;
    let v = space.slot(id).value_index(value)?;
    Some((id, Some(v)))
}

fn canonical(model: &Model, e: EntityRef) -> String {
    let space = model.space();
    match e {
        (id, None) => space.slot_path(id).to_string(),
        (id, Some(v)) => format!("{}/{}", space.slot_path(id), space.slot(id).values[v].name),
    }
}

fn pos(line: usize) -> SourcePos {
    SourcePos::new(0, line as u32, 1)
}

fn paragraphs(lines: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for l in lines {
        if l.trim().is_empty() {
            if !cur.is_empty() {
                out.push(cur.join("\n"));
                cur.clear();
            }
        } else {
            cur.push(l.trim_end());
        }
    }
    if !cur.is_empty() {
        out.push(cur.join("\n"));
    }
    out
}

fn non_empty(s: String) -> Option<String> {
    if s.is_empty() {
        None
    } else {
        Some(s)
    }
}

impl LocalizationPackage {
    /// A package with no texts; every lookup falls back to the model.
    pub fn empty(model: &Model, locale: &str) -> Self {
        let mut p = LocalizationPackage {
            locale: locale.to_string(),
            ..Default::default()
        };
        p.coverage = p.compute_coverage(model);
        p
    }

    /// Builds a package from file texts. Malformed files yield errors;
    /// entries naming unknown nodes, answers or entities yield warnings.
    pub fn build(model: &Model, files: &PackageFiles) -> Result<Self, Diagnostics> {
        let mut errors = Vec::new();
        let mut p = LocalizationPackage {
            locale: files.locale.clone(),
            ..Default::default()
        };

        if let Some((name, text)) = &files.model_md {
            let mut lines = text.lines();
            match lines.next().map(str::trim) {
                Some(h) if h.starts_with("# ") => {
                    p.title = Some(h[2..].trim().to_string());
                    let rest: Vec<&str> = lines.collect();
                    p.about = non_empty(paragraphs(&rest).join("\n\n"));
                }
                _ => errors.push(Diagnostic::error(name.as_str(), pos(1), "model.md must start with a `# ` title heading")),
            }
        }

        for (id, name, text) in &files.nodes {
            let is_ask = model
                .graph()
                .find(id)
                .is_some_and(|i| matches!(model.graph().node(i).kind, NodeKind::Ask { .. }));
            if !is_ask {
                p.warnings.push(Diagnostic::warning(name.as_str(), pos(1), format!("no ask node `{id}` in the model")));
                continue;
            }
            let mut lines = text.lines();
            let question = lines.next().unwrap_or("").trim();
            if question.is_empty() {
                errors.push(Diagnostic::error(name.as_str(), pos(1), "first line must hold the question"));
                continue;
            }
            let rest: Vec<&str> = lines.collect();
            p.nodes.insert(
                id.clone(),
                NodeText {
                    question: question.to_string(),
                    elaboration: non_empty(paragraphs(&rest).join("\n\n")),
                },
            );
        }

        if let Some((name, text)) = &files.answers {
            for (n, line) in text.lines().enumerate() {
                let t = line.trim();
                if t.is_empty() || t.starts_with('#') {
                    continue;
                }
                let Some((key, display)) = t.split_once(':') else {
                    errors.push(Diagnostic::error(name.as_str(), pos(n + 1), "expected `key: text`"));
                    continue;
                };
                let (key, display) = (key.trim(), display.trim());
                if key.is_empty() || display.is_empty() {
                    errors.push(Diagnostic::error(name.as_str(), pos(n + 1), "expected `key: text`"));
                } else if !model.has_answer_key(key) {
                    p.warnings
                        .push(Diagnostic::warning(name.as_str(), pos(n + 1), format!("no answer `{key}` in the model")));
                } else {
                    p.answers.insert(key.to_string(), display.to_string());
                }
            }
        }

        if let Some((name, text)) = &files.space_md {
            let lines: Vec<&str> = text.lines().collect();
            let headings: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].trim_start().starts_with('#')).collect();
            if let Some(first) = lines.iter().position(|l| !l.trim().is_empty()) {
                if headings.first() != Some(&first) {
                    errors.push(Diagnostic::error(name.as_str(), pos(first + 1), "text before the first heading"));
                }
            }
            for (k, &h) in headings.iter().enumerate() {
                let end = headings.get(k + 1).copied().unwrap_or(lines.len());
                let head = lines[h].trim_start().trim_start_matches('#').trim();
                let (path, display) = match head.split_once('|') {
                    Some((p, d)) => (p.trim(), non_empty(d.trim().to_string())),
                    None => (head, None),
                };
                if path.is_empty() {
                    errors.push(Diagnostic::error(name.as_str(), pos(h + 1), "heading names no entity"));
                    continue;
                }
                let Some(entity) = resolve_entity(model, path) else {
                    p.warnings
                        .push(Diagnostic::warning(name.as_str(), pos(h + 1), format!("no slot or value `{path}` in the space")));
                    continue;
                };
                let mut paras = paragraphs(&lines[h + 1..end]).into_iter();
                let tooltip = paras.next();
                let long: Vec<String> = paras.collect();
                p.entities.insert(
                    canonical(model, entity),
                    EntityText {
                        name: display,
                        tooltip,
                        long_text: non_empty(long.join("\n\n")),
                    },
                );
            }
        }

        if !errors.is_empty() {
            return Err(Diagnostics(errors));
        }
        p.coverage = p.compute_coverage(model);
        Ok(p)
    }

    fn compute_coverage(&self, model: &Model) -> Coverage {
        let g = model.graph();
        let mut c = Coverage::default();
        let mut keys = BTreeSet::new();
        for i in g.ask_nodes() {
            c.asks_total += 1;
            if self.nodes.contains_key(&g.node(i).id) {
                c.asks_localized += 1;
            }
            if let NodeKind::Ask { answers, .. } = &g.node(i).kind {
                keys.extend(answers.iter().map(|a| a.key.as_str()));
            }
        }
        c.answers_total = keys.len();
        c.answers_localized = keys.iter().filter(|k| self.answers.contains_key(**k)).count();
        let space = model.space();
        for (id, slot) in space.slots().iter().enumerate() {
            let mut all = Vec::with_capacity(slot.values.len() + 1);
            all.push(canonical(model, (id, None)));
            all.extend((0..slot.values.len()).map(|v| canonical(model, (id, Some(v)))));
            c.entities_total += all.len();
            c.entities_localized += all
                .iter()
                .filter(|k| self.entities.get(k.as_str()).is_some_and(|e| e.name.is_some() || e.tooltip.is_some()))
                .count();
        }
        c
    }

    /// Looks up a text, falling back to the model's inline text or remark and
    /// finally to the identifier itself.
    pub fn localize(&self, model: &Model, key: TextKey<'_>, level: TextLevel) -> Result<String, LocalizeError> {
        match key {
            TextKey::Node(id) => {
                let g = model.graph();
                let idx = g.find(id).ok_or_else(|| LocalizeError::UnknownNode(id.to_string()))?;
                let local = self.nodes.get(id);
                let question = match (local, &g.node(idx).kind) {
                    (Some(t), _) => t.question.clone(),
                    (None, NodeKind::Ask { text, .. }) => text.clone(),
                    (None, NodeKind::Section { title, .. }) => title.clone(),
                    (None, _) => id.to_string(),
                };
                Ok(match level {
                    TextLevel::Name => question,
                    _ => local.and_then(|t| t.elaboration.clone()).unwrap_or(question),
                })
            }
            TextKey::Answer(k) => {
                if let Some(t) = self.answers.get(k) {
                    Ok(t.clone())
                } else if model.has_answer_key(k) {
                    Ok(k.to_string())
                } else {
                    Err(LocalizeError::UnknownAnswer(k.to_string()))
                }
            }
            TextKey::Entity(path) => {
                let e = resolve_entity(model, path).ok_or_else(|| LocalizeError::UnknownEntity(path.to_string()))?;
                let local = self.entities.get(&canonical(model, e));
                let slot = model.space().slot(e.0);
                let (ident, remark) = match e.1 {
                    None => (&slot.name, &slot.remark),
                    Some(v) => (&slot.values[v].name, &slot.values[v].remark),
                };
                let name = local
                    .and_then(|t| t.name.clone())
                    .or_else(|| remark.clone())
                    .unwrap_or_else(|| ident.clone());
                let tooltip = || local.and_then(|t| t.tooltip.clone()).or_else(|| remark.clone());
                Ok(match level {
                    TextLevel::Name => name,
                    TextLevel::Tooltip => tooltip().unwrap_or(name),
                    TextLevel::Long => local.and_then(|t| t.long_text.clone()).or_else(tooltip).unwrap_or(name),
                })
            }
        }
    }

    pub fn title_or<'a>(&'a self, model: &'a Model) -> &'a str {
        self.title.as_deref().unwrap_or(model.title())
    }
}

/// Picks a locale: exact match (case-insensitive), then same primary subtag,
/// then `default` when available, then the first available locale.
pub fn negotiate_locale<'a>(available: &[&'a str], requested: Option<&str>, default: Option<&str>) -> Option<&'a str> {
    let primary = |s: &str| s.split(['-', '_']).next().unwrap_or("").to_ascii_lowercase();
    if let Some(req) = requested {
        if let Some(hit) = available.iter().find(|a| a.eq_ignore_ascii_case(req)) {
            return Some(hit);
        }
        let p = primary(req);
        if let Some(hit) = available.iter().find(|a| primary(a) == p) {
            return Some(hit);
        }
    }
    if let Some(d) = default {
        if let Some(hit) = available.iter().find(|a| a.eq_ignore_ascii_case(d)) {
            return Some(hit);
        }
    }
    available.first().copied()
}
