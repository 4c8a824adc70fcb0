//! Value inferencers: declarative derivation of one atomic slot's coordinate
//! from the coordinates of other dimensions.
//!
//! An inferencer lists a chain of anchor locations, each strictly above the
//! previous one, and the target value at each anchor. A `support` inferencer
//! assigns to `l` the value of the lowest anchor whose support space contains
//! `l`; a `comply` inferencer the value of the highest anchor whose compliance
//! space contains `l`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, SourcePos};
use crate::graph::Assignment;
use crate::space::{Coord, Location, PartialLocation, PolicySpace, SlotKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferenceMode {
    Support,
    Comply,
}

impl InferenceMode {
    pub fn keyword(self) -> &'static str {
        match self {
            InferenceMode::Support => "support",
            InferenceMode::Comply => "comply",
        }
    }
}

/// One parsed row: anchor terms and the value inferred there.
#[derive(Debug, Clone)]
pub struct RowDef {
    pub anchor: Vec<Assignment>,
    pub value: String,
    pub pos: SourcePos,
}

impl PartialEq for RowDef {
    fn eq(&self, other: &Self) -> bool {
        self.anchor == other.anchor && self.value == other.value
    }
}

impl Eq for RowDef {}

/// A parsed inferencer, names not yet checked against a space.
#[derive(Debug, Clone)]
pub struct InferencerDef {
    pub target: String,
    pub mode: InferenceMode,
    pub rows: Vec<RowDef>,
    pub pos: SourcePos,
}

impl PartialEq for InferencerDef {
    fn eq(&self, other: &Self) -> bool {
        self.target == other.target && self.mode == other.mode && self.rows == other.rows
    }
}

impl Eq for InferencerDef {}

/// An inferencer resolved against a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueInferencer {
    pub target_slot: String,
    pub target: usize,
    pub mode: InferenceMode,
    pub rows: Vec<(PartialLocation, Coord)>,
}

impl ValueInferencer {
    /// Resolves names and checks the chain invariants.
    ///
    /// Every row must constrain the same dimensions, which keeps the set of
    /// qualifying anchors contiguous in the chain.
    pub fn resolve(def: &InferencerDef, space: &PolicySpace, file: &str) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let target_slot = match space.find_slot(&def.target) {
            Some(id) if space.slot(id).kind == SlotKind::Atomic => id,
            Some(_) => {
                return Err(alloc::vec![Diagnostic::error(
                    file,
                    def.pos,
                    format!("inference target `{}` is not an atomic slot", def.target),
                )])
            }
            None => {
                return Err(alloc::vec![Diagnostic::error(
                    file,
                    def.pos,
                    format!("unknown inference target `{}`", def.target),
                )])
            }
        };
        let target = space.atomic_dimension(target_slot).expect("atomic");

        let mut rows: Vec<(PartialLocation, Coord)> = Vec::new();
        for row in &def.rows {
            let mut anchor = PartialLocation::unconstrained(space.dimension_count());
            for (slot, value) in row.anchor.iter().flat_map(Assignment::pairs) {
                match space.resolve_assignment(slot, value) {
                    Ok((dim, _)) if dim == target => diags.push(Diagnostic::error(
                        file,
                        row.pos,
                        format!("inferencer for `{}` references its own target", def.target),
                    )),
                    Ok((dim, coord)) => anchor.set(dim, coord),
                    Err(e) => diags.push(Diagnostic::error(file, row.pos, format!("{e}"))),
                }
            }
            match space.value_coord(target_slot, &row.value) {
                Some(c) => rows.push((anchor, c)),
                None => diags.push(Diagnostic::error(
                    file,
                    row.pos,
                    format!("slot `{}` has no value `{}`", def.target, row.value),
                )),
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        let dims_of = |p: &PartialLocation| p.constrained().map(|(d, _)| d).collect::<Vec<_>>();
        let first_dims = dims_of(&rows[0].0);
        for (i, pair) in rows.windows(2).enumerate() {
            let (prev, next) = (&pair[0].0, &pair[1].0);
            let pos = def.rows[i + 1].pos;
            if dims_of(next) != first_dims {
                diags.push(Diagnostic::error(
                    file,
                    pos,
                    "every row of an inferencer must constrain the same slots",
                ));
                continue;
            }
            let ok = prev
                .to_location()
                .compare(&next.to_location())
                .is_ok_and(|r| r == crate::space::Relation::Less);
            if !ok {
                diags.push(Diagnostic::error(
                    file,
                    pos,
                    format!(
                        "row {} of the `{}` inferencer is not strictly above row {}",
                        i + 2,
                        def.target,
                        i + 1
                    ),
                ));
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }
        Ok(ValueInferencer {
            target_slot: def.target.clone(),
            target,
            mode: def.mode,
            rows,
        })
    }

    fn qualifies(&self, anchor: &PartialLocation, l: &Location) -> bool {
        match self.mode {
            InferenceMode::Support => anchor.support_space_contains(l),
            InferenceMode::Comply => anchor.compliance_space_contains(l),
        }
        .unwrap_or(false)
    }

    /// Coordinate this inferencer assigns to the target at `l`, if any.
    pub fn infer_once(&self, l: &Location) -> Option<Coord> {
        let hit = match self.mode {
            InferenceMode::Support => self.rows.iter().position(|(a, _)| self.qualifies(a, l)),
            InferenceMode::Comply => self.rows.iter().rposition(|(a, _)| self.qualifies(a, l)),
        };
        debug_assert!(
            self.qualifying_rows_are_contiguous(l, hit),
            "qualifying anchors of `{}` are not contiguous",
            self.target_slot
        );
        hit.map(|i| self.rows[i].1)
    }

    /// Support: all rows after the first hit qualify. Comply: all rows before the last hit.
    fn qualifying_rows_are_contiguous(&self, l: &Location, hit: Option<usize>) -> bool {
        let Some(hit) = hit else { return true };
        let mut rows = self.rows.iter().enumerate();
        match self.mode {
            InferenceMode::Support => rows.all(|(i, (a, _))| (i >= hit) == self.qualifies(a, l)),
            InferenceMode::Comply => rows.all(|(i, (a, _))| (i <= hit) == self.qualifies(a, l)),
        }
    }
}

/// Infers a single value; `None` when no anchor qualifies.
pub fn infer_once(inferencer: &ValueInferencer, l: &Location) -> Option<Coord> {
    inferencer.infer_once(l)
}

/// Applies all inferencers until a full pass leaves the location unchanged.
pub fn apply_fixpoint(inferencers: &[ValueInferencer], l: &Location) -> Location {
    apply_fixpoint_counted(inferencers, l).0
}

/// Like [`apply_fixpoint`], also returning the number of passes run
/// (including the final pass that changed nothing).
pub fn apply_fixpoint_counted(inferencers: &[ValueInferencer], l: &Location) -> (Location, usize) {
    let mut loc = l.clone();
    let mut passes = 0;
    loop {
        passes += 1;
        let mut moved = false;
        for inf in inferencers {
            if let Some(c) = inf.infer_once(&loc) {
                moved |= loc.raise(inf.target, c);
            }
        }
        if !moved {
            return (loc, passes);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_policy_space, parse_value_inferencers};

    const SPACE: &str = include_str!("../fixtures/fig-demo/space.ps");
    const FIG3: &str = include_str!("../fixtures/fig-demo/plan.vi");

    fn setup(src: &str) -> (PolicySpace, Vec<ValueInferencer>) {
        let space = parse_policy_space("space.ps", SPACE).unwrap();
        let infs = parse_value_inferencers("plan.vi", src)
            .unwrap()
            .iter()
            .map(|d| ValueInferencer::resolve(d, &space, "plan.vi").unwrap())
            .collect();
        (space, infs)
    }

    fn at(space: &PolicySpace, age: &str, pf: &str) -> Location {
        space.location_of(&[("AgeGroup", age), ("ProcessFairness", pf)]).unwrap()
    }

    fn plan_name(space: &PolicySpace, c: Option<Coord>) -> Option<&str> {
        let dim = space.atomic_dimension(space.find_slot("Plan").unwrap()).unwrap();
        c.map(|c| space.value_name(dim, c).unwrap())
    }

    #[test]
    fn support_values_at_the_anchors() {
        let (s, infs) = setup(FIG3);
        let plan = &infs[0];
        assert_eq!(plan_name(&s, plan.infer_once(&at(&s, "under21", "ok"))), Some("None"));
        assert_eq!(plan_name(&s, plan.infer_once(&at(&s, "workForce", "flawed"))), Some("L1"));
        assert_eq!(plan_name(&s, plan.infer_once(&at(&s, "pension", "flawed"))), Some("L2"));
        assert_eq!(plan_name(&s, plan.infer_once(&at(&s, "pension", "illegal"))), Some("L3"));
    }

    #[test]
    fn support_and_comply_between_anchors() {
        let (s, infs) = setup(FIG3);
        let comply = setup(&FIG3.replace("support", "comply")).1;
        let l = at(&s, "workForce", "ok");
        assert_eq!(plan_name(&s, infs[0].infer_once(&l)), Some("L1"));
        assert_eq!(plan_name(&s, comply[0].infer_once(&l)), Some("None"));
        let l = at(&s, "voluntaryPension", "flawed");
        assert_eq!(plan_name(&s, infs[0].infer_once(&l)), Some("L2"));
    }

    #[test]
    fn no_qualifying_anchor_means_no_inference() {
        let (s, _) = setup(FIG3);
        let comply = setup(&FIG3.replace("support", "comply")).1;
        // nothing is below (under21, ok) except the bottom region
        assert_eq!(comply[0].infer_once(&at(&s, "under21", "flawed")), Some(1));
        assert_eq!(comply[0].infer_once(&s.bottom()), None);
    }

    #[test]
    fn swapped_rows_break_the_chain() {
        let lines: Vec<&str> = FIG3.lines().collect();
        let swapped = [lines[0], lines[1], lines[3], lines[2], lines[4], lines[5]].join("\n");
        let space = parse_policy_space("space.ps", SPACE).unwrap();
        let defs = parse_value_inferencers("plan.vi", &swapped).unwrap();
        let err = ValueInferencer::resolve(&defs[0], &space, "plan.vi").unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].message.contains("row 3"), "{}", err[0]);
        assert_eq!(err[0].line, 4);
    }

    #[test]
    fn resolution_errors() {
        let space = parse_policy_space("space.ps", SPACE).unwrap();
        let check = |src: &str, needle: &str| {
            let defs = parse_value_inferencers("x.vi", src).unwrap();
            let err = ValueInferencer::resolve(&defs[0], &space, "x.vi").unwrap_err();
            assert!(err.iter().any(|d| d.message.contains(needle)), "{err:?}");
        };
        check("[Plan: support [Plan=L1 -> L2]]", "own target");
        check("[Nope: support [AgeGroup=pension -> L2]]", "unknown inference target");
        check("[Recommendations: support [AgeGroup=pension -> L2]]", "not an atomic");
        check("[Plan: support [AgeGroup=old -> L2]]", "no value `old`");
        check("[Plan: support [AgeGroup=pension -> L9]]", "no value `L9`");
        check(
            "[Plan: support [AgeGroup=under21 -> L1] [ProcessFairness=ok -> L2]]",
            "same slots",
        );
    }

    #[test]
    fn fixpoint_sets_plan() {
        let (s, infs) = setup(FIG3);
        let l = at(&s, "workForce", "flawed");
        let out = apply_fixpoint(&infs, &l);
        assert_eq!(out, s.location_of(&[("AgeGroup", "workForce"), ("ProcessFairness", "flawed"), ("Plan", "L1")]).unwrap());
        assert_eq!(apply_fixpoint(&[], &l), l);
    }

    #[test]
    fn chained_inferencers_reach_a_fixpoint() {
        let src = "R: consists of A, B, C.\nA: one of a1, a2.\nB: one of b1, b2.\nC: one of c1, c2.";
        let space = parse_policy_space("abc.ps", src).unwrap();
        // listed in the order that a single pass would get wrong
        let vi = "[C: comply [B=b2 -> c2]]\n[B: comply [A=a2 -> b2]]";
        let infs: Vec<_> = parse_value_inferencers("abc.vi", vi)
            .unwrap()
            .iter()
            .map(|d| ValueInferencer::resolve(d, &space, "abc.vi").unwrap())
            .collect();
        let l = space.location_of(&[("A", "a2")]).unwrap();
        let (out, passes) = apply_fixpoint_counted(&infs, &l);
        assert_eq!(out, space.location_of(&[("A", "a2"), ("B", "b2"), ("C", "c2")]).unwrap());
        assert_eq!(passes, 3);

        let mut single = l.clone();
        for inf in &infs {
            if let Some(c) = inf.infer_once(&single) {
                single.raise(inf.target, c);
            }
        }
        assert_ne!(single, out);
    }

    mod properties {
        use super::*;
        use crate::model::Model;
        use crate::testkit::{random_inference_chain, random_inference_chain_with, ChainOptions};
        use proptest::prelude::*;
        use rand::rngs::SmallRng;
        use rand::{Rng, SeedableRng};

        fn random_location(m: &Model, rng: &mut SmallRng) -> Location {
            let coords = m
                .space()
                .dimensions()
                .iter()
                .map(|d| rng.random_range(0..d.cardinality))
                .collect();
            Location::from_coords(coords)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn fixpoint_is_bounded_inflationary_and_idempotent(seed in any::<u64>()) {
                let mut rng = SmallRng::seed_from_u64(seed);
                let dims = rng.random_range(1..=8);
                let m = Model::build(&random_inference_chain(&mut rng, dims, 5).sources()).unwrap();
                let l = random_location(&m, &mut rng);
                let (out, passes) = apply_fixpoint_counted(m.inferencers(), &l);
                prop_assert!(passes <= m.space().total_coordinates() + 1);
                prop_assert!(l.le(&out).unwrap());
                prop_assert_eq!(apply_fixpoint(m.inferencers(), &out), out);
            }

            #[test]
            fn single_mode_sorted_chains_are_monotone(seed in any::<u64>(), comply in any::<bool>()) {
                let mut rng = SmallRng::seed_from_u64(seed);
                let dims = rng.random_range(1..=8);
                let opts = ChainOptions {
                    mode: Some(if comply { "comply" } else { "support" }),
                    sorted_values: true,
                    top_anchor: true,
                };
                let m = Model::build(&random_inference_chain_with(&mut rng, dims, 5, opts).sources()).unwrap();
                let a = random_location(&m, &mut rng);
                let b = a.join(&random_location(&m, &mut rng)).unwrap();
                let fa = apply_fixpoint(m.inferencers(), &a);
                let fb = apply_fixpoint(m.inferencers(), &b);
                prop_assert!(fa.le(&fb).unwrap(), "{:?} <= {:?} but {:?} > {:?}", a, b, fa, fb);
            }
        }
    }
}
