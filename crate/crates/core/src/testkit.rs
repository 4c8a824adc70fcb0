//! Random and synthetic model generators for tests and benchmarks.
//!
//! Every generated model is valid: it builds without errors.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::model::ModelSources;

/// Source texts of a generated model.
#[derive(Debug, Clone, Default)]
pub struct GeneratedModel {
    pub space: String,
    pub graphs: Vec<String>,
    pub inferencers: String,
}

impl GeneratedModel {
    pub fn sources(&self) -> ModelSources<'_> {
        const NAMES: [&str; 4] = ["main.dg", "parts.dg", "more.dg", "extra.dg"];
        ModelSources {
            id: "generated",
            title: "Generated",
            version: "1",
            space: ("space.ps", &self.space),
            graphs: self.graphs.iter().enumerate().map(|(i, g)| (NAMES[i % 4], g.as_str())).collect(),
            inferencers: if self.inferencers.is_empty() {
                Vec::new()
            } else {
                vec![("rules.vi", self.inferencers.as_str())]
            },
        }
    }
}

#[derive(Debug, Clone)]
struct GenSlot {
    name: String,
    aggregate: bool,
    values: Vec<String>,
}

const WORDS: [&str; 12] = [
    "did", "the", "worker", "receive", "notice", "in", "writing", "before", "dismissal", "{sic}", "pay", "days",
];

fn words<R: Rng>(rng: &mut R, n: usize) -> String {
    let picked: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).expect("non-empty")).collect();
    picked.join(" ")
}

fn escape(s: &str, specials: &[char]) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c == '\\' || specials.contains(&c) {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn space_text<R: Rng>(rng: &mut R, slots: &[GenSlot], groups: &[Vec<usize>]) -> String {
    let mut out = String::new();
    let mut top: Vec<String> = Vec::new();
    let grouped: Vec<usize> = groups.iter().flatten().copied().collect();
    for (g, _) in groups.iter().enumerate() {
        top.push(format!("Group{g}"));
    }
    top.extend(
        (0..slots.len())
            .filter(|i| !grouped.contains(i))
            .map(|i| slots[i].name.clone()),
    );
    let _ = writeln!(out, "Root: consists of {}.", top.join(", "));
    for (g, members) in groups.iter().enumerate() {
        let names: Vec<&str> = members.iter().map(|&i| slots[i].name.as_str()).collect();
        let _ = writeln!(out, "Group{g}: consists of {}.", names.join(", "));
    }
    for s in slots {
        let kw = if s.aggregate { "some of" } else { "one of" };
        let _ = write!(out, "{}:", s.name);
        if rng.random_bool(0.2) {
            let _ = write!(out, " <-- {}\n ", words(rng, 3));
        }
        let _ = writeln!(out, " {kw} {}.", s.values.join(", "));
    }
    out
}

fn gen_slots<R: Rng>(rng: &mut R, atomics: usize, aggregates: usize, max_values: usize) -> Vec<GenSlot> {
    let mut slots = Vec::new();
    for i in 0..atomics + aggregates {
        let aggregate = i >= atomics;
        let n = rng.random_range(1..=max_values);
        slots.push(GenSlot {
            name: format!("S{i}"),
            aggregate,
            values: (0..n).map(|k| format!("v{i}-{k}")).collect(),
        });
    }
    slots
}

struct GraphGen<'a, R> {
    rng: &'a mut R,
    slots: &'a [GenSlot],
    parts: Vec<String>,
    next_id: usize,
}

impl<R: Rng> GraphGen<'_, R> {
    fn assignment(&mut self) -> String {
        let s = self.slots.choose(self.rng).expect("slots");
        if s.aggregate {
            let k = self.rng.random_range(1..=s.values.len());
            let vals: Vec<&str> = s.values.iter().take(k).map(String::as_str).collect();
            format!("{}+={}", s.name, vals.join(", "))
        } else {
            format!("{}={}", s.name, s.values.choose(self.rng).expect("values"))
        }
    }

    fn id(&mut self) -> String {
        if self.rng.random_bool(0.4) {
            self.next_id += 1;
            format!(">n{}< ", self.next_id)
        } else {
            String::new()
        }
    }

    fn body(&mut self, depth: usize, in_section: bool, allow_calls: bool) -> String {
        let n = self.rng.random_range(0..=if depth == 0 { 5 } else { 3 });
        let mut items: Vec<String> = (0..n).map(|_| self.node(depth, in_section, allow_calls)).collect();
        if in_section && self.rng.random_bool(0.15) {
            items.push(String::from("[continue]"));
        }
        items.join("\n")
    }

    fn node(&mut self, depth: usize, in_section: bool, allow_calls: bool) -> String {
        let nested = depth < 3;
        let choice = self.rng.random_range(0..if nested { 9 } else { 3 });
        let id = self.id();
        match choice {
            0 | 1 => {
                let k = self.rng.random_range(1..=3);
                let a: Vec<String> = (0..k).map(|_| self.assignment()).collect();
                let sep = if self.rng.random_bool(0.5) { "; " } else { ";\n  " };
                format!("[{id}set: {}]", a.join(sep))
            }
            2 => format!("[{id}todo: {}]", escape(&words(self.rng, 2), &[']'])),
            3 if allow_calls && !self.parts.is_empty() => {
                let p = self.parts.choose(self.rng).expect("parts").clone();
                format!("[{id}call: {p}]")
            }
            3..=5 => {
                let pool = ["yes", "no", "maybe", "not sure"];
                let mut keys: Vec<&str> = Vec::new();
                for &k in &pool {
                    if self.rng.random_bool(0.5) {
                        keys.push(k);
                    }
                }
                if keys.is_empty() {
                    keys.push("no");
                }
                let mut out = format!("[{id}ask: {{text: {}}} {{answers:", escape(&words(self.rng, 5), &['{', '}']));
                for k in keys {
                    let b = self.body(depth + 1, in_section, allow_calls);
                    let _ = write!(out, " {{{k}: {b}}}");
                }
                out.push_str("}]");
                out
            }
            6 => {
                let atomics: Vec<&GenSlot> = self.slots.iter().filter(|s| !s.aggregate).collect();
                let s = *atomics.choose(self.rng).expect("an atomic slot");
                let mut out = format!("[{id}consider: {{slot: {}}} {{options:", s.name);
                for v in &s.values {
                    if self.rng.random_bool(0.6) {
                        let b = self.body(depth + 1, in_section, allow_calls);
                        let _ = write!(out, " {{{v}: {b}}}");
                    }
                }
                out.push('}');
                if self.rng.random_bool(0.5) {
                    let b = self.body(depth + 1, in_section, allow_calls);
                    let _ = write!(out, " {{else: {b}}}");
                }
                out.push(']');
                out
            }
            7 => {
                let b = self.body(depth + 1, true, allow_calls);
                format!("[{id}section: {{title: {}}}\n{b}]", escape(&words(self.rng, 2), &['{', '}']))
            }
            _ => format!("[{id}end]"),
        }
    }
}

/// A random valid model exercising every graph construct, spread over two
/// graph files, with a random inferencer over the atomic slots.
pub fn random_model<R: Rng>(rng: &mut R) -> GeneratedModel {
    let atomics = rng.random_range(2..=5);
    let aggregates = rng.random_range(0..=2);
    let slots = gen_slots(rng, atomics, aggregates, 4);
    let groups = if rng.random_bool(0.5) { vec![vec![0, 1]] } else { Vec::new() };
    let space = space_text(rng, &slots, &groups);

    let part_count = rng.random_range(0..=2);
    let parts: Vec<String> = (0..part_count).map(|i| format!("part-{i}")).collect();
    let mut gen = GraphGen {
        rng,
        slots: &slots,
        parts: parts.clone(),
        next_id: 0,
    };
    let mut main = gen.body(0, false, true);
    if main.is_empty() {
        main = String::from("[todo: start here]");
    }
    let mut second = String::new();
    for p in &parts {
        let b = gen.body(1, false, false);
        let _ = writeln!(second, "[-->{p}<\n{b}\n[end]\n--]");
    }
    if second.is_empty() || gen.rng.random_bool(0.3) {
        second.push_str(&gen.body(1, false, false));
    }
    let graphs = vec![main, second];

    let target = rng.random_range(0..atomics);
    let sources: Vec<usize> = (0..atomics).filter(|&i| i != target).collect();
    let inferencers = inferencer_text(rng, &slots, target, &sources);
    GeneratedModel {
        space,
        graphs,
        inferencers,
    }
}

/// Shape of generated inferencers.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainOptions {
    /// `Some("support")` or `Some("comply")` fixes the mode; `None` picks at random.
    pub mode: Option<&'static str>,
    /// Row values never decrease along the chain.
    pub sorted_values: bool,
    /// The last anchor sits at the top of its dimensions, so support-mode
    /// inference is defined everywhere.
    pub top_anchor: bool,
}

/// Rows over the same dimensions, each anchor strictly above the previous one.
fn inferencer_text<R: Rng>(rng: &mut R, slots: &[GenSlot], target: usize, sources: &[usize]) -> String {
    inferencer_text_with(rng, slots, target, sources, ChainOptions::default())
}

fn inferencer_text_with<R: Rng>(
    rng: &mut R,
    slots: &[GenSlot],
    target: usize,
    sources: &[usize],
    opts: ChainOptions,
) -> String {
    if sources.is_empty() {
        return String::new();
    }
    let k = rng.random_range(1..=sources.len());
    let mut dims: Vec<usize> = sources.to_vec();
    while dims.len() > k {
        let i = rng.random_range(0..dims.len());
        dims.remove(i);
    }
    let mut coords: Vec<usize> = dims.iter().map(|&d| rng.random_range(0..slots[d].values.len())).collect();
    let mode = opts
        .mode
        .unwrap_or_else(|| if rng.random_bool(0.5) { "support" } else { "comply" });
    let mut out = format!("[{}: {mode}\n", slots[target].name);
    let rows = rng.random_range(1..=4);
    let mut floor = 0;
    let mut emit = |rng: &mut R, coords: &[usize], out: &mut String| {
        let terms: Vec<String> = dims
            .iter()
            .zip(coords)
            .map(|(&d, &c)| format!("{}={}", slots[d].name, slots[d].values[c]))
            .collect();
        let values = &slots[target].values;
        let v = if opts.sorted_values {
            floor = rng.random_range(floor..values.len());
            floor
        } else {
            rng.random_range(0..values.len())
        };
        let _ = writeln!(out, "  [{} -> {}]", terms.join("; "), values[v]);
    };
    for r in 0..rows {
        if r > 0 {
            let raisable: Vec<usize> = (0..dims.len()).filter(|&i| coords[i] + 1 < slots[dims[i]].values.len()).collect();
            let Some(&i) = raisable.choose(rng) else { break };
            coords[i] += rng.random_range(1..slots[dims[i]].values.len() - coords[i]);
        }
        emit(rng, &coords, &mut out);
    }
    let top: Vec<usize> = dims.iter().map(|&d| slots[d].values.len() - 1).collect();
    if opts.top_anchor && coords != top {
        emit(rng, &top, &mut out);
    }
    out.push_str("]\n");
    out
}

/// A space of `dims` atomic dimensions with at most `max_coords` coordinates
/// each (bottom included), a chain of inferencers where later slots depend on
/// earlier ones, and a trivial graph.
pub fn random_inference_chain<R: Rng>(rng: &mut R, dims: usize, max_coords: usize) -> GeneratedModel {
    random_inference_chain_with(rng, dims, max_coords, ChainOptions::default())
}

pub fn random_inference_chain_with<R: Rng>(
    rng: &mut R,
    dims: usize,
    max_coords: usize,
    opts: ChainOptions,
) -> GeneratedModel {
    let slots = gen_slots(rng, dims, 0, max_coords - 1);
    let space = space_text(rng, &slots, &[]);
    let mut inferencers = String::new();
    for target in 1..dims {
        if rng.random_bool(0.8) {
            let sources: Vec<usize> = (0..target).collect();
            inferencers.push_str(&inferencer_text_with(rng, &slots, target, &sources, opts));
        }
    }
    GeneratedModel {
        space,
        graphs: vec![String::from("[todo: no interview]")],
        inferencers,
    }
}

/// A deterministic model with exactly `dims` dimensions and `nodes` graph
/// nodes: sections of yes/no questions, a called part and considers.
pub fn synthetic_model(dims: usize, nodes: usize) -> GeneratedModel {
    assert!(dims >= 8 && nodes >= 40, "synthetic model too small");
    // two aggregates of four members each, the rest atomic with three values
    let atomics = dims - 8;
    let mut slots: Vec<GenSlot> = (0..atomics)
        .map(|i| GenSlot {
            name: format!("S{i}"),
            aggregate: false,
            values: (0..3).map(|k| format!("v{i}-{k}")).collect(),
        })
        .collect();
    for a in 0..2 {
        slots.push(GenSlot {
            name: format!("Agg{a}"),
            aggregate: true,
            values: (0..4).map(|k| format!("m{a}-{k}")).collect(),
        });
    }
    let mut space = String::new();
    let names: Vec<&str> = slots.iter().map(|s| s.name.as_str()).collect();
    let _ = writeln!(space, "Root: consists of {}.", names.join(", "));
    for s in &slots {
        let kw = if s.aggregate { "some of" } else { "one of" };
        let _ = writeln!(space, "{}: {kw} {}.", s.name, s.values.join(", "));
    }

    let mut graph = String::new();
    let mut count = 0;
    let mut slot = 0;
    let mut next_slot = || {
        slot = (slot + 1) % atomics;
        slot
    };
    // part: 1 part + 4 sets + end
    let _ = writeln!(graph, "[-->shared<");
    for k in 0..4 {
        let _ = writeln!(graph, "  [set: Agg{}+=m{}-{}]", k % 2, k % 2, k);
    }
    graph.push_str("  [end]\n--]\n");
    count += 6;
    let mut q = 0;
    // each block: section + call + 3 asks with two set answers = 11 nodes
    while count + 11 + 3 <= nodes {
        let _ = writeln!(graph, "[section: {{title: Block {q}}}\n  [call: shared]");
        for _ in 0..3 {
            let s = next_slot();
            let _ = writeln!(
                graph,
                "  [>q{q}< ask: {{text: Question {q}?}} {{answers: {{yes: [set: S{s}=v{s}-2]}} {{no: [set: S{s}=v{s}-1]}}}}]"
            );
            q += 1;
        }
        graph.push_str("]\n");
        count += 11;
    }
    // consider with one option body: 2 nodes
    while count + 2 <= nodes {
        let s = next_slot();
        let _ = writeln!(
            graph,
            "[consider: {{slot: S{s}}} {{options: {{v{s}-2: [set: S{s}=v{s}-2]}}}} {{else: }}]"
        );
        count += 2;
    }
    while count < nodes {
        let s = next_slot();
        let _ = writeln!(graph, "[set: S{s}=v{s}-0]");
        count += 1;
    }

    let mut inferencers = String::new();
    for t in 0..4 {
        let target = atomics - 1 - t;
        let _ = writeln!(
            inferencers,
            "[S{target}: comply\n  [S{t}=v{t}-1 -> v{target}-0]\n  [S{t}=v{t}-2 -> v{target}-1]\n]"
        );
    }
    GeneratedModel {
        space,
        graphs: vec![graph],
        inferencers,
    }
}
