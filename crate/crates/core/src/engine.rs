//! Interview execution.
//!
//! A [`Session`] walks the decision graph of a [`Model`], stopping at each
//! `[ask]`. Every `[set]` joins its assignments into the current location and
//! then runs the inferencers to a fixpoint, so the location only ever rises.
//! Sessions are plain values: answering works on a copy that replaces the
//! session only when the step succeeds.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{NodeIdx, NodeKind};
use crate::inference::apply_fixpoint;
use crate::localization::{LocalizationPackage, TextKey, TextLevel};
use crate::model::Model;
use crate::space::{Coord, Location, Relation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("session is finished")]
    Finished,
    #[error("session is not finished")]
    NotFinished,
    #[error("node `{node}` has no answer `{answer}`")]
    InvalidAnswer { node: String, answer: String },
    #[error("the session is waiting at `{current}`, not at `{given}`")]
    StaleNode { current: String, given: String },
    #[error("answer index {index} out of range ({len} answers given)")]
    InvalidIndex { index: usize, len: usize },
    #[error("call depth limit {limit} exceeded at `{node}`")]
    CallDepthExceeded { node: String, limit: usize },
    #[error("journal is for model `{found}`, expected `{expected}`")]
    ModelMismatch { expected: String, found: String },
    #[error("runtime fault at `{node}`: {message}")]
    Fault { node: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnswerRecord {
    pub node_id: String,
    pub answer: String,
}

/// Serialized answer history; replaying it reproduces the session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Journal {
    pub model_id: String,
    pub version: String,
    pub answers: Vec<AnswerRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    AwaitingAnswer,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct CallFrame {
    call_site: NodeIdx,
    section_depth: usize,
}

#[derive(Debug, Clone, Copy)]
enum Point {
    Enter(NodeIdx),
    Complete(NodeIdx),
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    model_id: String,
    version: String,
    location: Location,
    current: Option<NodeIdx>,
    call_stack: Vec<CallFrame>,
    sections: Vec<NodeIdx>,
    transcript: Vec<AnswerRecord>,
    todo_visits: Vec<String>,
}

impl Session {
    /// Starts an interview: inferencers run once on the bottom location, then
    /// control runs from the entry node to the first question.
    pub fn start(model: &Model) -> Result<Session, EngineError> {
        let mut s = Session {
            model_id: model.id().to_string(),
            version: model.version().to_string(),
            location: apply_fixpoint(model.inferencers(), &model.space().bottom()),
            current: None,
            call_stack: Vec::new(),
            sections: Vec::new(),
            transcript: Vec::new(),
            todo_visits: Vec::new(),
        };
        if let Some(entry) = model.graph().entry() {
            s.run(model, Point::Enter(entry))?;
        }
        Ok(s)
    }

    pub fn status(&self) -> Status {
        if self.current.is_some() {
            Status::AwaitingAnswer
        } else {
            Status::Finished
        }
    }

    pub fn is_finished(&self) -> bool {
        self.current.is_none()
    }

    pub fn location(&self) -> &Location {
        &self.location
    }

    pub fn current_node(&self) -> Option<NodeIdx> {
        self.current
    }

    pub fn current_node_id<'m>(&self, model: &'m Model) -> Option<&'m str> {
        self.current.map(|i| model.graph().node(i).id.as_str())
    }

    pub fn transcript(&self) -> &[AnswerRecord] {
        &self.transcript
    }

    /// Ids of `[todo]` nodes passed so far, in order.
    pub fn todo_visits(&self) -> &[String] {
        &self.todo_visits
    }

    pub fn call_depth(&self) -> usize {
        self.call_stack.len()
    }

    /// Answer keys offered at the current question.
    pub fn available_answers<'m>(&self, model: &'m Model) -> Vec<&'m str> {
        match self.current.map(|i| &model.graph().node(i).kind) {
            Some(NodeKind::Ask { answers, .. }) => answers.iter().map(|a| a.key.as_str()).collect(),
            _ => Vec::new(),
        }
    }

    /// Answers the current question. On error the session is unchanged.
    pub fn answer(&mut self, model: &Model, answer: &str) -> Result<(), EngineError> {
        let node = self.current.ok_or(EngineError::Finished)?;
        let NodeKind::Ask { answers, .. } = &model.graph().node(node).kind else {
            return Err(self.fault(model, node, "waiting at a node that is not an ask"));
        };
        let node_id = &model.graph().node(node).id;
        let chosen = answers.iter().find(|a| a.key == answer).ok_or_else(|| EngineError::InvalidAnswer {
            node: node_id.clone(),
            answer: answer.to_string(),
        })?;
        let mut next = self.clone();
        next.current = None;
        next.transcript.push(AnswerRecord {
            node_id: node_id.clone(),
            answer: answer.to_string(),
        });
        next.run(
            model,
            match chosen.body {
                Some(h) => Point::Enter(h),
                None => Point::Complete(node),
            },
        )?;
        *self = next;
        Ok(())
    }

    /// Like [`Session::answer`], but first checks the session waits at `node_id`.
    pub fn answer_at(&mut self, model: &Model, node_id: &str, answer: &str) -> Result<(), EngineError> {
        match self.current_node_id(model) {
            None => Err(EngineError::Finished),
            Some(cur) if cur != node_id => Err(EngineError::StaleNode {
                current: cur.to_string(),
                given: node_id.to_string(),
            }),
            Some(_) => self.answer(model, answer),
        }
    }

    /// Changes the answer at transcript position `index`. Later answers are
    /// re-applied while the interview still reaches the same questions and
    /// they remain valid; the rest are dropped.
    pub fn revise_answer(&self, model: &Model, index: usize, answer: &str) -> Result<Session, EngineError> {
        if index >= self.transcript.len() {
            return Err(EngineError::InvalidIndex {
                index,
                len: self.transcript.len(),
            });
        }
        let mut s = Session::start(model)?;
        for r in &self.transcript[..index] {
            s.answer_at(model, &r.node_id, &r.answer)?;
        }
        s.answer_at(model, &self.transcript[index].node_id, answer)?;
        for r in &self.transcript[index + 1..] {
            if s.answer_at(model, &r.node_id, &r.answer).is_err() {
                break;
            }
        }
        Ok(s)
    }

    pub fn journal(&self) -> Journal {
        Journal {
            model_id: self.model_id.clone(),
            version: self.version.clone(),
            answers: self.transcript.clone(),
        }
    }

    /// Rebuilds a session from a journal. Every record must match the
    /// question the interview is waiting at.
    pub fn replay(model: &Model, journal: &Journal) -> Result<Session, EngineError> {
        if journal.model_id != model.id() {
            return Err(EngineError::ModelMismatch {
                expected: model.id().to_string(),
                found: journal.model_id.clone(),
            });
        }
        let mut s = Session::start(model)?;
        for r in &journal.answers {
            s.answer_at(model, &r.node_id, &r.answer)?;
        }
        Ok(s)
    }

    pub fn final_report(&self, model: &Model, l10n: Option<&LocalizationPackage>) -> Result<FinalReport, EngineError> {
        if !self.is_finished() {
            return Err(EngineError::NotFinished);
        }
        Ok(FinalReport::new(model, &self.location, l10n))
    }

    fn fault(&self, model: &Model, node: NodeIdx, message: &str) -> EngineError {
        EngineError::Fault {
            node: model.graph().node(node).id.clone(),
            message: message.to_string(),
        }
    }

    fn apply(&mut self, model: &Model, node: NodeIdx, ops: &[(usize, Coord)]) -> Result<(), EngineError> {
        let before = self.location.clone();
        let mut moved = false;
        for &(dim, c) in ops {
            moved |= self.location.raise(dim, c);
        }
        if moved {
            self.location = apply_fixpoint(model.inferencers(), &self.location);
        }
        match before.compare(&self.location) {
            Ok(Relation::Less | Relation::Equal) => Ok(()),
            _ => Err(self.fault(model, node, "location decreased")),
        }
    }

    fn run(&mut self, model: &Model, mut point: Point) -> Result<(), EngineError> {
        let g = model.graph();
        loop {
            point = match point {
                Point::Enter(i) => match &g.node(i).kind {
                    NodeKind::Ask { .. } => {
                        self.current = Some(i);
                        return Ok(());
                    }
                    NodeKind::Set { .. } => {
                        self.apply(model, i, &model.set_ops[i])?;
                        Point::Complete(i)
                    }
                    NodeKind::Call { target } => {
                        let part = g.part(target).ok_or_else(|| self.fault(model, i, "call target is not a part"))?;
                        if self.call_stack.len() >= model.call_depth_limit() {
                            return Err(EngineError::CallDepthExceeded {
                                node: g.node(i).id.clone(),
                                limit: model.call_depth_limit(),
                            });
                        }
                        self.call_stack.push(CallFrame {
                            call_site: i,
                            section_depth: self.sections.len(),
                        });
                        match &g.node(part).kind {
                            NodeKind::Part { body: Some(h) } => Point::Enter(*h),
                            _ => Point::Return,
                        }
                    }
                    NodeKind::Consider { options, otherwise, .. } => {
                        let hit = model.consider_ops[i]
                            .iter()
                            .position(|&(dim, c)| self.location.get(dim) == c);
                        let body = match (hit, otherwise) {
                            (Some(o), _) => options[o].body,
                            (None, Some(body)) => *body,
                            (None, None) => None,
                        };
                        match body {
                            Some(h) => Point::Enter(h),
                            None => Point::Complete(i),
                        }
                    }
                    NodeKind::Section { body, .. } => {
                        self.sections.push(i);
                        match body {
                            Some(h) => Point::Enter(*h),
                            None => Point::Complete(i),
                        }
                    }
                    NodeKind::End => {
                        if self.call_stack.is_empty() {
                            self.current = None;
                            return Ok(());
                        }
                        Point::Return
                    }
                    NodeKind::Continue => {
                        let s = g
                            .enclosing_section(i)
                            .ok_or_else(|| self.fault(model, i, "continue outside a section"))?;
                        Point::Complete(s)
                    }
                    NodeKind::Todo { .. } => {
                        self.todo_visits.push(g.node(i).id.clone());
                        Point::Complete(i)
                    }
                    NodeKind::Part { .. } => return Err(self.fault(model, i, "entered a part without a call")),
                },
                Point::Complete(i) => {
                    if matches!(g.node(i).kind, NodeKind::Section { .. }) {
                        if let Some(at) = self.sections.iter().rposition(|&s| s == i) {
                            self.sections.truncate(at);
                        }
                    }
                    let n = g.node(i);
                    match (n.successor, n.parent) {
                        (Some(s), _) => Point::Enter(s),
                        (None, Some(p)) if matches!(g.node(p).kind, NodeKind::Part { .. }) => Point::Return,
                        (None, Some(p)) => Point::Complete(p),
                        (None, None) => {
                            self.current = None;
                            return Ok(());
                        }
                    }
                }
                Point::Return => match self.call_stack.pop() {
                    Some(frame) => {
                        self.sections.truncate(frame.section_depth);
                        Point::Complete(frame.call_site)
                    }
                    None => {
                        self.current = None;
                        return Ok(());
                    }
                },
            };
        }
    }
}

/// One entry per dimension above bottom, in dimension order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportEntry {
    pub dimension: String,
    pub slot: String,
    pub value: String,
    pub slot_name: String,
    pub name: String,
    pub tooltip: String,
    pub long_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FinalReport {
    pub model_id: String,
    pub version: String,
    pub locale: Option<String>,
    pub coordinates: Vec<Coord>,
    pub entries: Vec<ReportEntry>,
}

impl FinalReport {
    pub fn new(model: &Model, location: &Location, l10n: Option<&LocalizationPackage>) -> Self {
        let space = model.space();
        let fallback;
        let pkg = match l10n {
            Some(p) => p,
            None => {
                fallback = LocalizationPackage::empty(model, "");
                &fallback
            }
        };
        let text = |key: &str, level| {
            pkg.localize(model, TextKey::Entity(key), level)
                .unwrap_or_else(|_| key.to_string())
        };
        let mut entries = Vec::new();
        for (d, dim) in space.dimensions().iter().enumerate() {
            let c = location.get(d);
            if c == 0 {
                continue;
            }
            let slot = space.slot_path(dim.slot).to_string();
            let value = space.value_name(d, c).unwrap_or("").to_string();
            let key = alloc::format!("{slot}/{value}");
            entries.push(ReportEntry {
                dimension: dim.path.clone(),
                slot_name: text(&slot, TextLevel::Name),
                name: text(&key, TextLevel::Name),
                tooltip: text(&key, TextLevel::Tooltip),
                long_text: text(&key, TextLevel::Long),
                slot,
                value,
            });
        }
        FinalReport {
            model_id: model.id().to_string(),
            version: model.version().to_string(),
            locale: l10n.map(|p| p.locale.clone()),
            coordinates: location.coords().to_vec(),
            entries,
        }
    }

    pub fn render_text(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}: {}", e.slot_name, e.name);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::{fig_demo, fig_demo_package};

    fn build(space: &str, graph: &str) -> Model {
        Model::build(&crate::model::ModelSources {
            id: "t",
            title: "t",
            version: "1",
            space: ("s.ps", space),
            graphs: alloc::vec![("g.dg", graph)],
            inferencers: Vec::new(),
        })
        .unwrap()
    }

    fn value<'a>(m: &'a Model, s: &Session, slot: &str) -> &'a str {
        let id = m.space().find_slot(slot).unwrap();
        let d = m.space().atomic_dimension(id).unwrap();
        m.space().coordinate_label(d, s.location().get(d))
    }

    #[test]
    fn fairness_run() {
        let m = fig_demo();
        let mut s = Session::start(&m).unwrap();
        assert_eq!(s.current_node_id(&m), Some("gp-hearing"));
        assert_eq!(value(&m, &s, "Plan"), "None");
        assert_eq!(s.available_answers(&m), ["yes", "no"]);
        s.answer(&m, "no").unwrap();
        assert_eq!(value(&m, &s, "ProcessFairness"), "flawed");
        assert_eq!(s.current_node_id(&m), Some("gp-hearing-details"));
        s.answer(&m, "no").unwrap();
        assert_eq!(s.current_node_id(&m), Some("gp-complaint"));
        s.answer(&m, "no").unwrap();
        assert!(s.is_finished());
        // ok joined into flawed stays flawed
        assert_eq!(value(&m, &s, "ProcessFairness"), "flawed");
        let r = s.final_report(&m, None).unwrap();
        let dims: Vec<&str> = r.entries.iter().map(|e| e.dimension.as_str()).collect();
        assert_eq!(dims, ["Root/ProcessFairness", "Root/Plan"]);
    }

    #[test]
    fn invalid_answer_leaves_session_unchanged() {
        let m = fig_demo();
        let mut s = Session::start(&m).unwrap();
        let before = s.clone();
        assert!(matches!(s.answer(&m, "maybe"), Err(EngineError::InvalidAnswer { .. })));
        assert_eq!(s, before);
        assert_eq!(
            s.answer_at(&m, "gp-complaint", "yes"),
            Err(EngineError::StaleNode {
                current: "gp-hearing".into(),
                given: "gp-complaint".into()
            })
        );
        assert_eq!(s, before);
    }

    #[test]
    fn journal_round_trip_and_revision() {
        let m = fig_demo();
        let mut s = Session::start(&m).unwrap();
        for a in ["no", "no", "yes"] {
            s.answer(&m, a).unwrap();
        }
        let j = s.journal();
        let json = serde_json::to_string(&j).unwrap();
        assert!(json.contains("\"nodeId\":\"gp-hearing\""));
        let back: Journal = serde_json::from_str(&json).unwrap();
        let r = Session::replay(&m, &back).unwrap();
        assert_eq!(r.location(), s.location());

        let revised = s.revise_answer(&m, 0, "yes").unwrap();
        assert!(revised.is_finished());
        assert_eq!(value(&m, &revised, "ProcessFairness"), "illegal");
        assert_eq!(revised.transcript().len(), 3);

        let cut = s.revise_answer(&m, 1, "yes").unwrap();
        assert!(cut.is_finished());
        assert_eq!(cut.transcript().len(), 2);
        assert!(matches!(s.revise_answer(&m, 3, "yes"), Err(EngineError::InvalidIndex { .. })));
    }

    #[test]
    fn replay_rejects_mismatches() {
        let m = fig_demo();
        let j = Journal {
            model_id: "other".into(),
            version: "1".into(),
            answers: Vec::new(),
        };
        assert!(matches!(Session::replay(&m, &j), Err(EngineError::ModelMismatch { .. })));
        let j = Journal {
            model_id: m.id().into(),
            version: "1".into(),
            answers: alloc::vec![AnswerRecord {
                node_id: "gp-complaint".into(),
                answer: "no".into()
            }],
        };
        assert!(matches!(Session::replay(&m, &j), Err(EngineError::StaleNode { .. })));
    }

    #[test]
    fn calls_sections_and_continue() {
        let m = build(
            "R: consists of A, B, C.\nA: one of a1, a2.\nB: one of b1, b2.\nC: some of c.",
            "[section: {title: S}
               [>q< ask: {text: Q} {answers: {skip: [continue]} {stay: }}]
               [call: p]
               [set: B=b1]]
             [set: C+=c]
             [-->p<
               [set: A=a1]
               [end]
               [set: A=a2]
             --]",
        );
        let mut s = Session::start(&m).unwrap();
        s.answer(&m, "skip").unwrap();
        assert!(s.is_finished());
        assert_eq!(s.location().coords(), [0, 0, 1]);

        let mut s = Session::start(&m).unwrap();
        s.answer(&m, "stay").unwrap();
        assert_eq!(s.call_depth(), 0);
        assert_eq!(s.location().coords(), [1, 1, 1]);
    }

    #[test]
    fn consider_branches_on_the_location() {
        let m = build(
            "R: consists of A, B.\nA: one of x, y.\nB: one of p, q, r.",
            "[>a< ask: {text: ?} {answers: {x: [set: A=x]} {y: [set: A=y]} {none: }}]
             [consider: {slot: A} {options: {x: [set: B=p]} {y: [set: B=q]}} {else: [set: B=r]}]",
        );
        for (ans, b) in [("x", 1), ("y", 2), ("none", 3)] {
            let mut s = Session::start(&m).unwrap();
            s.answer(&m, ans).unwrap();
            assert_eq!(s.location().get(1), b, "{ans}");
        }
    }

    #[test]
    fn todo_visits_are_recorded() {
        let m = build("R: consists of A.\nA: one of x.", "[>t< todo: later] [set: A=x]");
        let s = Session::start(&m).unwrap();
        assert!(s.is_finished());
        assert_eq!(s.todo_visits(), ["t"]);
        assert!(s.transcript().is_empty());
    }

    #[test]
    fn recursion_hits_the_depth_limit() {
        let m = build("R: consists of A.\nA: one of x.", "[call: p]\n[-->p< [call: p] --]");
        assert_eq!(
            Session::start(&m),
            Err(EngineError::CallDepthExceeded {
                node: "_n3".into(),
                limit: 64
            })
        );
        let m = m.with_call_depth_limit(3);
        assert!(matches!(Session::start(&m), Err(EngineError::CallDepthExceeded { limit: 3, .. })));
    }

    #[test]
    fn localized_report() {
        let m = fig_demo();
        let p = fig_demo_package();
        let mut s = Session::start(&m).unwrap();
        for a in ["yes", "yes"] {
            s.answer(&m, a).unwrap();
        }
        let r = s.final_report(&m, Some(&p)).unwrap();
        assert_eq!(r.locale.as_deref(), Some("en"));
        let rec = r
            .entries
            .iter()
            .find(|e| e.dimension == "Root/Recommendations/sueFormerEmployerSoon")
            .unwrap();
        assert_eq!(rec.value, "sueFormerEmployerSoon");
        assert_ne!(rec.name, rec.value);
        assert!(matches!(Session::start(&m).unwrap().final_report(&m, None), Err(EngineError::NotFinished)));
    }

    #[test]
    fn trivial_starts() {
        let m = build("R: consists of A.\nA: one of x, y.", "[set: A=y]");
        let s = Session::start(&m).unwrap();
        assert!(s.is_finished());
        assert_eq!(s.location().coords(), [2]);

        let m = build("R: consists of A.\nA: one of x.", "[call: p]\n[-->p< [end] --]");
        let s = Session::start(&m).unwrap();
        assert!(s.is_finished());
        assert!(s.transcript().is_empty());
        assert!(s.final_report(&m, None).unwrap().entries.is_empty());
    }

    #[test]
    fn revision_edge_cases() {
        let m = fig_demo();
        let mut s = Session::start(&m).unwrap();
        for a in ["no", "no", "no"] {
            s.answer(&m, a).unwrap();
        }
        for i in 0..3 {
            assert_eq!(s.revise_answer(&m, i, "no").unwrap(), s);
        }
        let last = s.revise_answer(&m, 2, "yes").unwrap();
        assert_eq!(last.transcript()[..2], s.transcript()[..2]);
        assert!(matches!(s.revise_answer(&m, 1, "maybe"), Err(EngineError::InvalidAnswer { .. })));
    }

    mod properties {
        use super::*;
        use crate::testkit::random_model;
        use proptest::prelude::*;
        use rand::rngs::SmallRng;
        use rand::seq::IndexedRandom;
        use rand::SeedableRng;

        /// Runs random answers to completion (or 50 steps), returning every
        /// intermediate session.
        fn random_run(m: &Model, rng: &mut SmallRng) -> Vec<Session> {
            let mut s = match Session::start(m) {
                Ok(s) => s,
                Err(_) => return Vec::new(),
            };
            let mut out = vec![s.clone()];
            for _ in 0..50 {
                let Some(&a) = s.available_answers(m).choose(rng) else { break };
                if s.answer(m, a).is_err() {
                    break;
                }
                out.push(s.clone());
            }
            out
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn location_never_decreases(seed in any::<u64>()) {
                let mut rng = SmallRng::seed_from_u64(seed);
                let m = Model::build(&random_model(&mut rng).sources()).unwrap();
                let run = random_run(&m, &mut rng);
                for w in run.windows(2) {
                    prop_assert!(w[0].location().le(w[1].location()).unwrap());
                }
                if let Some(last) = run.last() {
                    for s in &run {
                        prop_assert!(s.location().le(last.location()).unwrap());
                    }
                }
            }

            #[test]
            fn replay_and_revision_are_sound(seed in any::<u64>()) {
                let mut rng = SmallRng::seed_from_u64(seed);
                let m = Model::build(&random_model(&mut rng).sources()).unwrap();
                let Some(last) = random_run(&m, &mut rng).pop() else { return Ok(()) };
                let again = Session::replay(&m, &last.journal()).unwrap();
                prop_assert_eq!(&again, &last);
                for (i, r) in last.transcript().iter().enumerate() {
                    prop_assert_eq!(&last.revise_answer(&m, i, &r.answer).unwrap(), &last);
                }
            }

            #[test]
            fn independent_fragments_commute(seed in any::<u64>()) {
                let mut rng = SmallRng::seed_from_u64(seed);
                let g = random_model(&mut rng);
                let space = g.space.clone();
                let m = Model::build(&g.sources()).unwrap();
                let sets: Vec<String> = m
                    .graph()
                    .nodes()
                    .iter()
                    .filter_map(|n| match &n.kind {
                        NodeKind::Set { assignments } => Some(
                            assignments
                                .iter()
                                .flat_map(|a| a.pairs())
                                .map(|(s, v)| {
                                    let id = m.space().find_slot(s).unwrap();
                                    let op = if m.space().slot(id).kind == crate::space::SlotKind::Aggregate { "+=" } else { "=" };
                                    alloc::format!("[set: {s}{op}{v}]")
                                })
                                .collect::<String>(),
                        ),
                        _ => None,
                    })
                    .collect();
                let half = sets.len() / 2;
                let (a, b) = (sets[..half].concat(), sets[half..].concat());
                let parts = alloc::format!("[-->a< {a} [end] --]\n[-->b< {b} [end] --]");
                let run = |order: &str| {
                    let graph = alloc::format!("{order}\n{parts}");
                    let m = Model::build(&crate::model::ModelSources {
                        id: "c", title: "c", version: "1",
                        space: ("s.ps", &space),
                        graphs: alloc::vec![("g.dg", graph.as_str())],
                        inferencers: Vec::new(),
                    }).unwrap();
                    Session::start(&m).unwrap().location().clone()
                };
                prop_assert_eq!(run("[call: a] [call: b]"), run("[call: b] [call: a]"));
            }
        }
    }
}
