//! A validated model: space, graph and inferencers resolved against each other.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diag::{Diagnostic, Diagnostics};
use crate::graph::{self, DecisionGraph, NodeKind};
use crate::inference::{InferencerDef, ValueInferencer};
use crate::parse::{parse_decision_graph, parse_policy_space, parse_value_inferencers};
use crate::space::{Coord, PolicySpace, SlotKind};

pub const DEFAULT_CALL_DEPTH_LIMIT: usize = 64;

/// Raw model sources as `(file name, text)` pairs.
#[derive(Debug, Clone, Default)]
pub struct ModelSources<'a> {
    pub id: &'a str,
    pub title: &'a str,
    pub version: &'a str,
    pub space: (&'a str, &'a str),
    pub graphs: Vec<(&'a str, &'a str)>,
    pub inferencers: Vec<(&'a str, &'a str)>,
}

/// A model that passed validation with no errors. Only this type can be
/// executed, so an unvalidated model is rejected at construction.
#[derive(Debug, Clone)]
pub struct Model {
    id: String,
    title: String,
    version: String,
    space: PolicySpace,
    graph: DecisionGraph,
    inferencer_defs: Vec<InferencerDef>,
    inferencers: Vec<ValueInferencer>,
    pub(crate) set_ops: Vec<Vec<(usize, Coord)>>,
    /// Per consider node, per option: the `(dimension, coordinate)` that selects it.
    pub(crate) consider_ops: Vec<Vec<(usize, Coord)>>,
    warnings: Vec<Diagnostic>,
    call_depth_limit: usize,
}

impl Model {
    /// Parses and validates all sources, collecting every diagnostic.
    pub fn build(src: &ModelSources<'_>) -> Result<Model, Diagnostics> {
        let mut diags = Vec::new();
        let space = parse_policy_space(src.space.0, src.space.1).map_err(|d| diags.extend(d)).ok();
        let graph = parse_decision_graph(&src.graphs).map_err(|d| diags.extend(d)).ok();
        let mut defs = Vec::new();
        for (name, text) in &src.inferencers {
            match parse_value_inferencers(name, text) {
                Ok(v) => defs.extend(v.into_iter().map(|d| (name.to_string(), d))),
                Err(d) => diags.extend(d),
            }
        }
        match (space, graph) {
            (Some(space), Some(graph)) if diags.is_empty() => {
                Model::from_parts(src.id, src.title, src.version, space, graph, defs)
            }
            _ => Err(Diagnostics(diags)),
        }
    }

    /// Validates already-parsed parts. `inferencers` pairs each definition with its file name.
    pub fn from_parts(
        id: &str,
        title: &str,
        version: &str,
        space: PolicySpace,
        graph: DecisionGraph,
        inferencers: Vec<(String, InferencerDef)>,
    ) -> Result<Model, Diagnostics> {
        let mut diags = graph::validate(&graph, &space);
        let mut resolved = Vec::new();
        for (file, def) in &inferencers {
            match ValueInferencer::resolve(def, &space, file) {
                Ok(v) => resolved.push(v),
                Err(d) => diags.extend(d),
            }
        }
        let diags = Diagnostics(diags);
        if diags.has_errors() {
            return Err(diags);
        }

        let mut set_ops = alloc::vec![Vec::new(); graph.nodes().len()];
        let mut consider_ops = alloc::vec![Vec::new(); graph.nodes().len()];
        for (i, node) in graph.nodes().iter().enumerate() {
            match &node.kind {
                NodeKind::Set { assignments } => {
                    set_ops[i] = assignments
                        .iter()
                        .flat_map(|a| a.pairs())
                        .map(|(slot, value)| space.resolve_assignment(slot, value).expect("validated"))
                        .collect();
                }
                NodeKind::Consider { slot, options, .. } => {
                    let id = space.find_slot(slot).expect("validated");
                    consider_ops[i] = options
                        .iter()
                        .map(|o| match space.slot(id).kind {
                            SlotKind::Atomic => (
                                space.atomic_dimension(id).expect("atomic"),
                                space.value_coord(id, &o.value).expect("validated"),
                            ),
                            _ => (space.member_dimension(id, &o.value).expect("validated"), 1),
                        })
                        .collect();
                }
                _ => {}
            }
        }

        Ok(Model {
            id: id.to_string(),
            title: title.to_string(),
            version: version.to_string(),
            space,
            graph,
            inferencer_defs: inferencers.into_iter().map(|(_, d)| d).collect(),
            inferencers: resolved,
            set_ops,
            consider_ops,
            warnings: diags.0,
            call_depth_limit: DEFAULT_CALL_DEPTH_LIMIT,
        })
    }

    pub fn with_call_depth_limit(mut self, limit: usize) -> Self {
        self.call_depth_limit = limit;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn space(&self) -> &PolicySpace {
        &self.space
    }

    pub fn graph(&self) -> &DecisionGraph {
        &self.graph
    }

    pub fn inferencer_defs(&self) -> &[InferencerDef] {
        &self.inferencer_defs
    }

    pub fn inferencers(&self) -> &[ValueInferencer] {
        &self.inferencers
    }

    /// Validation warnings (errors would have prevented construction).
    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    pub fn call_depth_limit(&self) -> usize {
        self.call_depth_limit
    }

    pub fn todo_report(&self) -> graph::TodoReport {
        graph::todo_report(&self.graph, &self.space, &self.inferencer_defs)
    }

    /// Whether some ask node offers `key` as an answer.
    pub fn has_answer_key(&self, key: &str) -> bool {
        self.graph.nodes().iter().any(|n| match &n.kind {
            NodeKind::Ask { answers, .. } => answers.iter().any(|a| a.key == key),
            _ => false,
        })
    }
}
