//! Cross-checks of the engine, inferencers and enumerator against the
//! independent implementations in `support/oracles.rs`.

mod support;

use std::collections::BTreeSet;

use policymodel_core::analysis::{enumerate_outcomes, parse_query, query};
use policymodel_core::inference::{InferenceMode, ValueInferencer};
use policymodel_core::parse::{parse_policy_space, parse_value_inferencers};
use policymodel_core::{Location, Model, ModelSources, Session};
use support::oracles::{self, chain_scan, fig, Mode};

const SPACE: &str = include_str!("../fixtures/fig-demo/space.ps");
const GRAPH: &str = include_str!("../fixtures/fig-demo/graph.dg");
const PLAN: &str = include_str!("../fixtures/fig-demo/plan.vi");

fn fig_demo() -> Model {
    Model::build(&ModelSources {
        id: "fig-demo",
        title: "Fair dismissal",
        version: "1.0",
        space: ("space.ps", SPACE),
        graphs: vec![("graph.dg", GRAPH)],
        inferencers: vec![("plan.vi", PLAN)],
    })
    .unwrap()
}

fn plan_inferencer(mode: InferenceMode) -> (policymodel_core::PolicySpace, ValueInferencer) {
    let space = parse_policy_space("space.ps", SPACE).unwrap();
    let mut def = parse_value_inferencers("plan.vi", PLAN).unwrap().remove(0);
    def.mode = mode;
    let inf = ValueInferencer::resolve(&def, &space, "plan.vi").unwrap();
    (space, inf)
}

#[test]
fn plan_table_matches_chain_scanner_on_all_twenty_locations() {
    for (mode, oracle_mode) in [(InferenceMode::Support, Mode::Support), (InferenceMode::Comply, Mode::Comply)] {
        let (space, inf) = plan_inferencer(mode);
        for age in 0..=4u16 {
            for fair in 0..=3u16 {
                let mut pairs = Vec::new();
                if age > 0 {
                    pairs.push(("AgeGroup", fig::AGE[age as usize - 1]));
                }
                if fair > 0 {
                    pairs.push(("ProcessFairness", fig::FAIRNESS[fair as usize - 1]));
                }
                let l = space.location_of(&pairs).unwrap();
                let expected = chain_scan(oracle_mode, &fig::ROWS, (age, fair));
                assert_eq!(inf.infer_once(&l), expected, "{mode:?} at ({age}, {fair})");
            }
        }
    }
}

#[test]
fn plan_table_named_cases() {
    let (space, support) = plan_inferencer(InferenceMode::Support);
    let (_, comply) = plan_inferencer(InferenceMode::Comply);
    let at = |a: &str, f: &str| space.location_of(&[("AgeGroup", a), ("ProcessFairness", f)]).unwrap();
    let name = |c: Option<u16>| c.map(|c| fig::PLAN[c as usize - 1]);
    assert_eq!(name(support.infer_once(&at("under21", "ok"))), Some("None"));
    assert_eq!(name(support.infer_once(&at("workForce", "flawed"))), Some("L1"));
    assert_eq!(name(support.infer_once(&at("pension", "flawed"))), Some("L2"));
    assert_eq!(name(support.infer_once(&at("pension", "illegal"))), Some("L3"));
    assert_eq!(name(support.infer_once(&at("workForce", "ok"))), Some("L1"));
    assert_eq!(name(comply.infer_once(&at("workForce", "ok"))), Some("None"));
    assert_eq!(name(support.infer_once(&at("voluntaryPension", "flawed"))), Some("L2"));
}

/// Applies the Plan row table via the chain scanner (support mode).
fn scan_plan(loc: &mut [u16]) {
    // dims: ProcessFairness, AgeGroup, Plan, Recommendations/.., Properties/..
    if let Some(p) = chain_scan(Mode::Support, &fig::ROWS, (loc[1], loc[0])) {
        loc[2] = loc[2].max(p);
    }
}

#[test]
fn engine_paths_match_the_structural_walker() {
    let m = fig_demo();
    let walked = oracles::walk(m.graph(), m.space(), vec![0; 5], &scan_plan);
    assert_eq!(walked.len(), 6);

    let set = enumerate_outcomes(&m, 1000);
    assert_eq!(set.paths.len(), 6);
    let engine: BTreeSet<(oracles::Transcript, Vec<u16>)> = set
        .paths
        .iter()
        .map(|p| {
            let t = p.answers.iter().map(|a| (a.node_id.clone(), a.answer.clone())).collect();
            (t, set.outcomes[p.outcome].coords().to_vec())
        })
        .collect();
    let oracle: BTreeSet<_> = walked.into_iter().collect();
    assert_eq!(engine, oracle);
}

#[test]
fn hand_enumerated_outcome_set() {
    let m = fig_demo();
    let set = enumerate_outcomes(&m, 1000);
    // [ProcessFairness, AgeGroup, Plan, sue, severanceCancellation]
    let expected: BTreeSet<Vec<u16>> = [
        vec![1, 0, 1, 0, 0], // ok, plan None
        vec![2, 0, 2, 0, 0], // flawed, plan L1
        vec![3, 0, 4, 1, 0], // illegal + sue, plan L3
        vec![3, 0, 4, 1, 1], // illegal + sue + severance cancellation
    ]
    .into_iter()
    .collect();
    let got: BTreeSet<Vec<u16>> = set.outcomes.iter().map(|l| l.coords().to_vec()).collect();
    assert_eq!(got, expected);
    let counts: usize = (0..set.outcomes.len()).map(|i| set.count(i)).sum();
    assert_eq!(counts, 6);
}

#[test]
fn witnesses_replay_to_their_locations() {
    let m = fig_demo();
    let set = enumerate_outcomes(&m, 1000);
    for (i, l) in set.outcomes.iter().enumerate() {
        let w = set.witness(i).unwrap();
        let mut s = Session::start(&m).unwrap();
        for a in &w.answers {
            s.answer_at(&m, &a.node_id, &a.answer).unwrap();
        }
        assert!(s.is_finished());
        assert_eq!(s.location(), l);
    }
}

#[test]
fn query_examples() {
    let m = fig_demo();
    let set = enumerate_outcomes(&m, 1000);
    let r = query(&set, &parse_query(m.space(), "ProcessFairness=illegal").unwrap());
    assert_eq!((r.outcomes.len(), r.paths.len()), (2, 4));
    let r = query(
        &set,
        &parse_query(m.space(), "ProcessFairness=ok AND Recommendations contains sueFormerEmployerSoon").unwrap(),
    );
    assert!(r.outcomes.is_empty() && r.paths.is_empty());
    let all = query(&set, &policymodel_core::space::SubspacePredicate::any(m.space()));
    assert_eq!(all.paths, set.paths);
}

#[test]
fn partial_enumeration() {
    let m = fig_demo();
    let set = enumerate_outcomes(&m, 3);
    assert!(set.partial);
    assert_eq!(set.paths.len(), 3);
}

#[test]
fn single_set_graph_has_one_path() {
    let m = Model::build(&ModelSources {
        id: "one",
        title: "one",
        version: "1",
        space: ("s.ps", "R: consists of A.\nA: one of x, y."),
        graphs: vec![("g.dg", "[set: A=y]")],
        inferencers: vec![],
    })
    .unwrap();
    let set = enumerate_outcomes(&m, 10);
    assert_eq!(set.paths.len(), 1);
    assert_eq!(set.outcomes, vec![Location::from_coords(vec![2])]);
}
