//! Acceptance criteria for the toolchain, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines reach stdout even when everything
//! passes. Exits non-zero if any criterion fails.

mod common;
#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use axum::http::{Method, StatusCode};
use policymodel::files::DirSource;
use policymodel::manifest::{load_model, LoadedModel};
use policymodel::service::Visibility;
use policymodel_core::analysis::enumerate_outcomes;
use policymodel_core::graph::{export_dot, DotOptions};
use policymodel_core::inference::{apply_fixpoint, apply_fixpoint_counted, InferenceMode, ValueInferencer};
use policymodel_core::parse::{
    parse_decision_graph, parse_policy_space, parse_value_inferencers, print_decision_graph, print_policy_space,
    print_value_inferencers,
};
use policymodel_core::space::Relation;
use policymodel_core::testkit::{random_inference_chain, random_model, synthetic_model, GeneratedModel};
use policymodel_core::{Journal, Location, Model, Session};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use oracles::{chain_scan, fig, Mode};

/// Mean wall time allowed for one fig-demo interview.
const FIG2_RUN_BUDGET: Duration = Duration::from_millis(1);
const FIG2_RUNS: u32 = 1000;
const LATTICE_TRIALS: usize = 10_000;
const FIXPOINT_CHAINS: usize = 200;
const FIXPOINT_POINTS_PER_CHAIN: usize = 25;
const SCALE_DIMENSIONS: usize = 74;
const SCALE_NODES: usize = 251;
const SCALE_BUDGET: Duration = Duration::from_secs(1);
const ROUND_TRIP_MODELS: usize = 50;
const SEED: u64 = 0x5eed_2024;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture() -> LoadedModel {
    load_model(&DirSource::new(common::fixture())).expect("fixture loads")
}

fn run_answers(m: &Model, answers: &[&str]) -> Result<Session, String> {
    let mut s = Session::start(m).map_err(|e| e.to_string())?;
    for a in answers {
        s.answer(m, a).map_err(|e| e.to_string())?;
    }
    ensure(s.is_finished(), || format!("{answers:?} did not finish"))?;
    Ok(s)
}

fn fairness(m: &Model, s: &Session) -> String {
    let d = m.space().dimension_by_path("Root/ProcessFairness").expect("dimension");
    m.space().value_name(d, s.location().get(d)).unwrap_or("(unset)").to_string()
}

fn fig2_monotonicity() -> Outcome {
    let loaded = fixture();
    let m = &loaded.model;
    let s = run_answers(m, &["no", "no", "no"])?;
    ensure(fairness(m, &s) == "flawed", || format!("[no,no,no] gave {}", fairness(m, &s)))?;
    let s = run_answers(m, &["yes", "no", "no"])?;
    ensure(fairness(m, &s) == "ok", || format!("[yes,no,no] gave {}", fairness(m, &s)))?;

    let t = Instant::now();
    for _ in 0..FIG2_RUNS {
        run_answers(m, &["no", "no", "no"])?;
    }
    let mean = t.elapsed() / FIG2_RUNS;
    ensure(mean < FIG2_RUN_BUDGET, || format!("mean run {mean:?}"))?;
    Ok(format!("flawed / ok, mean {mean:?} per run"))
}

/// Plan table from the chain scanner, for the structural walker.
fn scan_plan(loc: &mut [u16]) {
    // dims: ProcessFairness, AgeGroup, Plan, sue, severanceCancellation
    if let Some(p) = chain_scan(Mode::Support, &fig::ROWS, (loc[1], loc[0])) {
        loc[2] = loc[2].max(p);
    }
}

fn fig2_exhaustive() -> Outcome {
    let loaded = fixture();
    let m = &loaded.model;
    let set = enumerate_outcomes(m, 10_000);
    ensure(set.paths.len() == 6 && !set.partial, || format!("{} paths", set.paths.len()))?;
    ensure(set.faults.is_empty(), || format!("faults: {:?}", set.faults))?;

    // worked out by hand from the graph and the Plan table
    let expected: BTreeSet<Vec<u16>> = [
        vec![1, 0, 1, 0, 0],
        vec![2, 0, 2, 0, 0],
        vec![3, 0, 4, 1, 0],
        vec![3, 0, 4, 1, 1],
    ]
    .into_iter()
    .collect();
    let got: BTreeSet<Vec<u16>> = set.outcomes.iter().map(|l| l.coords().to_vec()).collect();
    ensure(got == expected, || format!("outcomes {got:?}"))?;

    let walked: BTreeSet<_> = oracles::walk(m.graph(), m.space(), vec![0; 5], &scan_plan).into_iter().collect();
    let engine: BTreeSet<_> = set
        .paths
        .iter()
        .map(|p| {
            let t: Vec<(String, String)> = p.answers.iter().map(|a| (a.node_id.clone(), a.answer.clone())).collect();
            (t, set.outcomes[p.outcome].coords().to_vec())
        })
        .collect();
    ensure(walked == engine, || "engine paths differ from the structural walker".into())?;

    for p in &set.paths {
        let j = Journal {
            model_id: m.id().into(),
            version: m.version().into(),
            answers: p.answers.clone(),
        };
        let s = Session::replay(m, &j).map_err(|e| e.to_string())?;
        ensure(s.is_finished() && s.location() == &set.outcomes[p.outcome], || {
            format!("witness {:?} does not replay", p.answers)
        })?;
    }
    Ok("6 paths, 4 outcomes, walker and replay agree".into())
}

fn fig3_inference() -> Outcome {
    let loaded = fixture();
    let space = loaded.model.space();
    let def = loaded.model.inferencer_defs()[0].clone();
    let mut checked = 0;
    for (mode, oracle) in [(InferenceMode::Support, Mode::Support), (InferenceMode::Comply, Mode::Comply)] {
        let mut d = def.clone();
        d.mode = mode;
        let inf = ValueInferencer::resolve(&d, space, "plan.vi").map_err(|e| format!("{e:?}"))?;
        let at = |age: u16, fair: u16| -> Location {
            let mut pairs = Vec::new();
            if age > 0 {
                pairs.push(("AgeGroup", fig::AGE[age as usize - 1]));
            }
            if fair > 0 {
                pairs.push(("ProcessFairness", fig::FAIRNESS[fair as usize - 1]));
            }
            space.location_of(&pairs).expect("location")
        };
        let name = |c: Option<u16>| c.map(|c| fig::PLAN[c as usize - 1]);
        for ((age, fair), plan) in fig::ROWS {
            let got = name(inf.infer_once(&at(age, fair)));
            ensure(got == Some(fig::PLAN[plan as usize - 1]), || {
                format!("{mode:?} anchor ({age},{fair}) gave {got:?}")
            })?;
        }
        for age in 0..=4 {
            for fair in 0..=3 {
                let expected = chain_scan(oracle, &fig::ROWS, (age, fair));
                let got = inf.infer_once(&at(age, fair));
                ensure(got == expected, || format!("{mode:?} ({age},{fair}): {got:?} vs {expected:?}"))?;
                checked += 1;
            }
        }
        let off = |a: &str, f: &str| name(inf.infer_once(&space.location_of(&[("AgeGroup", a), ("ProcessFairness", f)]).unwrap()));
        match mode {
            InferenceMode::Support => {
                ensure(off("workForce", "ok") == Some("L1"), || "support (workForce, ok)".into())?;
                ensure(off("voluntaryPension", "flawed") == Some("L2"), || "support (voluntaryPension, flawed)".into())?;
            }
            InferenceMode::Comply => ensure(off("workForce", "ok") == Some("None"), || "comply (workForce, ok)".into())?,
        }
    }
    Ok(format!("{checked} locations match the chain scanner"))
}

fn lattice() -> Outcome {
    let mut rng = SmallRng::seed_from_u64(SEED);
    let mut violations = 0;
    for _ in 0..LATTICE_TRIALS {
        let n = rng.random_range(1..=8);
        let mut loc = || Location::from_coords((0..n).map(|_| rng.random_range(0..5u16)).collect());
        let (a, b, c) = (loc(), loc(), loc());
        let bot = Location::bottom(n);
        let j = |x: &Location, y: &Location| x.join(y).unwrap();
        let cmp = |x: &Location, y: &Location| x.compare(y).unwrap();
        let ab = j(&a, &b);
        let mirrored = matches!(
            (cmp(&a, &b), cmp(&b, &a)),
            (Relation::Equal, Relation::Equal)
                | (Relation::Less, Relation::Greater)
                | (Relation::Greater, Relation::Less)
                | (Relation::Incomparable, Relation::Incomparable)
        );
        let checks = [
            j(&a, &a) == a,
            ab == j(&b, &a),
            j(&ab, &c) == j(&a, &j(&b, &c)),
            j(&a, &bot) == a && j(&bot, &a) == a,
            // a <= b exactly when joining b changes nothing
            a.le(&b).unwrap() == (ab == b),
            (cmp(&a, &b) == Relation::Equal) == (a == b),
            mirrored,
            a.le(&ab).unwrap() && b.le(&ab).unwrap(),
        ];
        violations += checks.iter().filter(|ok| !**ok).count();
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("{LATTICE_TRIALS} trials, 0 violations"))
}

fn fixpoint() -> Outcome {
    let mut rng = SmallRng::seed_from_u64(SEED + 1);
    let mut violations = Vec::new();
    let mut points = 0;
    for chain in 0..FIXPOINT_CHAINS {
        let dims = rng.random_range(2..=8);
        let coords = rng.random_range(2..=5);
        let g = random_inference_chain(&mut rng, dims, coords);
        let m = Model::build(&g.sources()).map_err(|d| format!("chain {chain}: {d}"))?;
        let space = m.space();
        for _ in 0..FIXPOINT_POINTS_PER_CHAIN {
            let l = Location::from_coords(
                (0..space.dimension_count())
                    .map(|d| rng.random_range(0..space.dimension(d).cardinality))
                    .collect(),
            );
            let (r, passes) = apply_fixpoint_counted(m.inferencers(), &l);
            points += 1;
            if passes > space.total_coordinates() + 1 {
                violations.push(format!("chain {chain}: {passes} passes"));
            }
            if !l.le(&r).unwrap() {
                violations.push(format!("chain {chain}: {l:?} decreased to {r:?}"));
            }
            if apply_fixpoint(m.inferencers(), &r) != r {
                violations.push(format!("chain {chain}: not idempotent at {l:?}"));
            }
        }
    }
    ensure(violations.is_empty(), || violations.join("; "))?;
    Ok(format!("{FIXPOINT_CHAINS} chains, {points} locations, 0 violations"))
}

fn scale() -> Outcome {
    let g = synthetic_model(SCALE_DIMENSIONS, SCALE_NODES);
    let mut rng = SmallRng::seed_from_u64(SEED + 2);
    let t = Instant::now();
    let m = Model::build(&g.sources()).map_err(|d| d.to_string())?;
    let dot = export_dot(m.graph(), DotOptions { section_clusters: true });
    let mut s = Session::start(&m).map_err(|e| e.to_string())?;
    let mut asked = 0;
    while !s.is_finished() {
        let answers = s.available_answers(&m);
        let a = answers[rng.random_range(0..answers.len())];
        s.answer(&m, a).map_err(|e| e.to_string())?;
        asked += 1;
    }
    let elapsed = t.elapsed();
    ensure(m.space().dimension_count() == SCALE_DIMENSIONS, || {
        format!("{} dimensions", m.space().dimension_count())
    })?;
    ensure(m.graph().nodes().len() == SCALE_NODES, || format!("{} nodes", m.graph().nodes().len()))?;
    ensure(dot.lines().filter(|l| l.contains(" [label=")).count() >= SCALE_NODES, || "DOT misses nodes".into())?;
    ensure(elapsed < SCALE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{SCALE_DIMENSIONS} dims, {SCALE_NODES} nodes, {asked} answers, {elapsed:?}"))
}

fn round_trip_one(label: &str, g: &GeneratedModel) -> Result<(), String> {
    let src = g.sources();
    let err = |what: &str, e: Vec<policymodel_core::Diagnostic>| format!("{label} {what}: {e:?}");
    let space = parse_policy_space(src.space.0, src.space.1).map_err(|e| err("space", e))?;
    let again = parse_policy_space(src.space.0, &print_policy_space(&space)).map_err(|e| err("printed space", e))?;
    ensure(space == again, || format!("{label}: space differs"))?;

    let graph = parse_decision_graph(&src.graphs).map_err(|e| err("graph", e))?;
    let printed = print_decision_graph(&graph);
    let named: Vec<(&str, &str)> = src.graphs.iter().zip(&printed).map(|((n, _), t)| (*n, t.as_str())).collect();
    let again = parse_decision_graph(&named).map_err(|e| err("printed graph", e))?;
    ensure(graph == again, || format!("{label}: graph differs"))?;

    for (name, text) in &src.inferencers {
        let infs = parse_value_inferencers(name, text).map_err(|e| err("inferencers", e))?;
        let again = parse_value_inferencers(name, &print_value_inferencers(&infs)).map_err(|e| err("printed inferencers", e))?;
        ensure(infs == again, || format!("{label}: inferencers differ"))?;
    }
    Ok(())
}

fn round_trip() -> Outcome {
    let read = |f: &str| std::fs::read_to_string(common::fixture().join(f)).expect("fixture file");
    let fig = GeneratedModel {
        space: read("space.ps"),
        graphs: vec![read("graph.dg")],
        inferencers: read("plan.vi"),
    };
    round_trip_one("fig-demo", &fig)?;
    let mut rng = SmallRng::seed_from_u64(SEED + 3);
    for i in 0..ROUND_TRIP_MODELS {
        round_trip_one(&format!("random model {i}"), &random_model(&mut rng))?;
    }
    Ok(format!("fig-demo and {ROUND_TRIP_MODELS} random models"))
}

async fn service_contract() -> Outcome {
    use common::{app, call, config};
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = config(dir.path(), Visibility::Public, None);
    let svc = app(&cfg);

    let v = call(&svc, Method::POST, "/api/models/fig-demo/1.0/sessions", Some(json!({ "locale": "en" })), None).await;
    ensure(v.status == StatusCode::CREATED, || format!("create: {}", v.status))?;
    let sid = v.json()["sessionId"].as_str().unwrap_or_default().to_string();
    for (node, a) in [("gp-hearing", "no"), ("gp-hearing-details", "yes")] {
        let uri = format!("/api/sessions/{sid}/answers");
        let r = call(&svc, Method::POST, &uri, Some(json!({ "nodeId": node, "answer": a })), None).await;
        ensure(r.status == StatusCode::OK, || format!("answer {node}: {}", r.status))?;
    }
    let api = call(&svc, Method::GET, &format!("/api/sessions/{sid}/report"), None, None).await;
    let loaded = fixture();
    let s = run_answers(&loaded.model, &["no", "yes"])?;
    let direct = serde_json::to_vec(&s.final_report(&loaded.model, loaded.package(Some("en"))).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(api.bytes == direct, || "API report differs from the engine report".into())?;

    // restart mid-interview
    let v = call(&svc, Method::POST, "/api/models/fig-demo/1.0/sessions", Some(json!({})), None).await;
    let sid = v.json()["sessionId"].as_str().unwrap_or_default().to_string();
    for (node, a) in [("gp-hearing", "yes"), ("gp-hearing-details", "no")] {
        let uri = format!("/api/sessions/{sid}/answers");
        call(&svc, Method::POST, &uri, Some(json!({ "nodeId": node, "answer": a })), None).await;
    }
    let before = call(&svc, Method::GET, &format!("/api/sessions/{sid}"), None, None).await;
    let after = call(&app(&cfg), Method::GET, &format!("/api/sessions/{sid}"), None, None).await;
    ensure(after.status == StatusCode::OK && after.bytes == before.bytes, || "restart lost session state".into())?;

    let private_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let private = app(&config(private_dir.path(), Visibility::Private, Some("the-key")));
    let uri = "/api/models/fig-demo/1.0/sessions";
    let listed = call(&private, Method::GET, "/api/models", None, None).await.json();
    ensure(listed == json!([]), || "private version listed".into())?;
    for u in [uri.to_string(), format!("{uri}?key=wrong")] {
        let r = call(&private, Method::POST, &u, Some(json!({})), None).await;
        ensure(r.status == StatusCode::FORBIDDEN, || format!("{u}: {}", r.status))?;
    }
    let r = call(&private, Method::POST, &format!("{uri}?key=the-key"), Some(json!({})), None).await;
    ensure(r.status == StatusCode::CREATED, || format!("with key: {}", r.status))?;
    Ok("report bytes identical, restart replays, private needs key".into())
}

fn main() {
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let criteria: Vec<Criterion> = vec![
        ("Fig 2 monotonicity fixture", Box::new(fig2_monotonicity)),
        ("Fig 2 exhaustive oracle", Box::new(fig2_exhaustive)),
        ("Fig 3 inference table", Box::new(fig3_inference)),
        ("Lattice property suite", Box::new(lattice)),
        ("Fixpoint properties", Box::new(fixpoint)),
        ("Scale check", Box::new(scale)),
        ("Parser round-trip", Box::new(round_trip)),
        ("Service contract", Box::new(move || rt.block_on(service_contract()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
