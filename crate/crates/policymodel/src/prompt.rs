//! The question a session is waiting on, rendered in one locale.

use std::collections::BTreeMap;

use policymodel_core::graph::{NodeIdx, NodeKind};
use policymodel_core::localization::{LocalizationPackage, TextKey, TextLevel};
use policymodel_core::{Model, Session};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Prompt {
    pub node_id: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elaboration: Option<String>,
    /// Canonical answer keys, in the order they are offered.
    pub answers: Vec<String>,
    /// Display text for each key, same order.
    pub answer_labels: Vec<String>,
    /// Tooltips for the slots and values the answers set directly, keyed by
    /// canonical path (`Root/Slot` or `Root/Slot/value`).
    pub entity_tooltips: BTreeMap<String, String>,
}

/// The current prompt, or `None` once the interview is finished.
pub fn prompt(model: &Model, session: &Session, l10n: Option<&LocalizationPackage>) -> Option<Prompt> {
    let idx = session.current_node()?;
    let fallback;
    let pkg = match l10n {
        Some(p) => p,
        None => {
            fallback = LocalizationPackage::empty(model, "");
            &fallback
        }
    };
    let g = model.graph();
    let node = g.node(idx);
    let NodeKind::Ask { answers, .. } = &node.kind else {
        return None;
    };
    let text = pkg
        .localize(model, TextKey::Node(&node.id), TextLevel::Name)
        .unwrap_or_default();
    let long = pkg
        .localize(model, TextKey::Node(&node.id), TextLevel::Long)
        .unwrap_or_default();
    let keys: Vec<String> = answers.iter().map(|a| a.key.clone()).collect();
    let labels = keys
        .iter()
        .map(|k| pkg.localize(model, TextKey::Answer(k), TextLevel::Name).unwrap_or_else(|_| k.clone()))
        .collect();

    let mut tooltips = BTreeMap::new();
    for a in answers {
        for (slot, value) in direct_assignments(model, a.body) {
            let space = model.space();
            let Some(id) = space.find_slot(&slot) else { continue };
            let slot_path = space.slot_path(id).to_string();
            let value_path = format!("{slot_path}/{value}");
            for key in [slot_path, value_path] {
                if let Ok(t) = pkg.localize(model, TextKey::Entity(&key), TextLevel::Tooltip) {
                    tooltips.insert(key, t);
                }
            }
        }
    }
    Some(Prompt {
        node_id: node.id.clone(),
        elaboration: (long != text).then_some(long),
        text,
        answers: keys,
        answer_labels: labels,
        entity_tooltips: tooltips,
    })
}

/// Assignments made by the `[set]` nodes of a body chain, not looking inside
/// nested nodes.
fn direct_assignments(model: &Model, head: Option<NodeIdx>) -> Vec<(String, String)> {
    let g = model.graph();
    let mut out = Vec::new();
    for i in g.chain(head) {
        if let NodeKind::Set { assignments } = &g.node(i).kind {
            for a in assignments {
                out.extend(a.pairs().map(|(s, v)| (s.to_string(), v.to_string())));
            }
        }
    }
    out
}
