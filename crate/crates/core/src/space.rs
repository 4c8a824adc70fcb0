//! Policy spaces, locations and the coordinate-wise order on them.
//!
//! A policy space is defined by a tree of slots. Atomic slots contribute one
//! dimension each; aggregate slots contribute one boolean membership
//! dimension per possible member; compound and TODO slots only group.
//!
//! Every atomic dimension has an implicit bottom coordinate (index 0, "unset")
//! below its first declared value, so the all-zero location is the least
//! element of the space and every update can be expressed as a join.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::{Diagnostic, SourcePos};

pub type SlotId = usize;
pub type Coord = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Atomic,
    Aggregate,
    Compound,
    Todo,
}

#[derive(Debug, Clone)]
pub struct ValueDefinition {
    pub name: String,
    pub remark: Option<String>,
    pub pos: SourcePos,
}

impl PartialEq for ValueDefinition {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.remark == other.remark
    }
}

impl Eq for ValueDefinition {}

#[derive(Debug, Clone)]
pub struct SlotRef {
    pub name: String,
    pub pos: SourcePos,
}

impl PartialEq for SlotRef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for SlotRef {}

/// One statement of a policy-space definition. Equality ignores source positions.
#[derive(Debug, Clone)]
pub struct SlotDefinition {
    pub name: String,
    pub kind: SlotKind,
    pub values: Vec<ValueDefinition>,
    pub children: Vec<SlotRef>,
    pub remark: Option<String>,
    pub pos: SourcePos,
}

impl PartialEq for SlotDefinition {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind == other.kind
            && self.values == other.values
            && self.children == other.children
            && self.remark == other.remark
    }
}

impl Eq for SlotDefinition {}

impl SlotDefinition {
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v.name == value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "member")]
pub enum DimensionKind {
    /// The dimension of an atomic slot: `unset` followed by the declared values.
    Atomic,
    /// Membership of the n-th declared value of an aggregate slot: `false < true`.
    Member(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimension {
    pub path: String,
    pub slot: SlotId,
    pub kind: DimensionKind,
    /// Number of coordinates including the bottom.
    pub cardinality: Coord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("space mismatch: location has {found} dimensions, space has {expected}")]
pub struct SpaceMismatch {
    pub expected: usize,
    pub found: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Mismatch(#[from] SpaceMismatch),
    #[error("unknown slot `{0}`")]
    UnknownSlot(String),
    #[error("slot `{slot}` has no value `{value}`")]
    UnknownValue { slot: String, value: String },
    #[error("slot `{0}` does not contribute a dimension")]
    NotADimension(String),
    #[error("dimension {dimension} has no coordinate {coord}")]
    CoordinateOutOfRange { dimension: usize, coord: Coord },
}

/// The slot tree of a model together with its derived, ordered dimensions.
#[derive(Debug, Clone)]
pub struct PolicySpace {
    file: String,
    slots: Vec<SlotDefinition>,
    root: SlotId,
    by_name: BTreeMap<String, SlotId>,
    parent: Vec<Option<SlotId>>,
    paths: Vec<String>,
    slot_dims: Vec<Range<usize>>,
    dimensions: Vec<Dimension>,
}

impl PartialEq for PolicySpace {
    fn eq(&self, other: &Self) -> bool {
        self.slots == other.slots && self.root == other.root
    }
}

impl Eq for PolicySpace {}

impl PolicySpace {
    /// Builds a space from slot statements, checking the tree invariants.
    ///
    /// `file` names the source for diagnostics.
    pub fn new(file: &str, slots: Vec<SlotDefinition>) -> Result<Self, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let mut by_name = BTreeMap::new();
        for (id, slot) in slots.iter().enumerate() {
            if by_name.insert(slot.name.clone(), id).is_some() {
                diags.push(Diagnostic::error(
                    file,
                    slot.pos,
                    format!("duplicate slot name `{}`", slot.name),
                ));
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        let mut parent: Vec<Option<SlotId>> = vec![None; slots.len()];
        let mut children: Vec<Vec<SlotId>> = vec![Vec::new(); slots.len()];
        for (id, slot) in slots.iter().enumerate() {
            match slot.kind {
                SlotKind::Atomic | SlotKind::Aggregate => {
                    if slot.values.is_empty() {
                        diags.push(Diagnostic::error(
                            file,
                            slot.pos,
                            format!("slot `{}` declares no values", slot.name),
                        ));
                    }
                    for (i, v) in slot.values.iter().enumerate() {
                        if slot.values[..i].iter().any(|w| w.name == v.name) {
                            diags.push(Diagnostic::error(
                                file,
                                v.pos,
                                format!("duplicate value `{}` in slot `{}`", v.name, slot.name),
                            ));
                        }
                    }
                }
                SlotKind::Compound => {
                    if slot.children.is_empty() {
                        diags.push(Diagnostic::error(
                            file,
                            slot.pos,
                            format!("compound slot `{}` has no children", slot.name),
                        ));
                    }
                    for child in &slot.children {
                        match by_name.get(&child.name) {
                            None => diags.push(Diagnostic::error(
                                file,
                                child.pos,
                                format!("unknown slot `{}` referenced by `{}`", child.name, slot.name),
                            )),
                            Some(&c) => {
                                if parent[c].is_some() {
                                    diags.push(Diagnostic::error(
                                        file,
                                        child.pos,
                                        format!("slot `{}` is referenced more than once", child.name),
                                    ));
                                } else {
                                    parent[c] = Some(id);
                                    children[id].push(c);
                                }
                            }
                        }
                    }
                }
                SlotKind::Todo => {}
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        // Cycle detection: with single parents a cycle is a parent chain that loops.
        let mut reported = vec![false; slots.len()];
        for start in 0..slots.len() {
            let mut seen = vec![false; slots.len()];
            let mut cur = start;
            while let Some(p) = parent[cur] {
                if seen[p] {
                    if !reported[p] {
                        let mut c = p;
                        loop {
                            reported[c] = true;
                            c = parent[c].expect("cycle members have parents");
                            if c == p {
                                break;
                            }
                        }
                        let pslot = &slots[parent[p].expect("in cycle")];
                        let pos = pslot
                            .children
                            .iter()
                            .find(|r| r.name == slots[p].name)
                            .map_or(pslot.pos, |r| r.pos);
                        diags.push(Diagnostic::error(
                            file,
                            pos,
                            format!("cycle in slot tree through `{}`", slots[p].name),
                        ));
                    }
                    break;
                }
                seen[p] = true;
                cur = p;
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        let roots: Vec<SlotId> = (0..slots.len()).filter(|&i| parent[i].is_none()).collect();
        let root = match roots.as_slice() {
            [] => {
                diags.push(Diagnostic::error(
                    file,
                    SourcePos::new(0, 1, 1),
                    "policy space has no root slot",
                ));
                return Err(diags);
            }
            [r] => *r,
            [_, rest @ ..] => {
                let names: Vec<&str> = roots.iter().map(|&r| slots[r].name.as_str()).collect();
                diags.push(Diagnostic::error(
                    file,
                    slots[rest[0]].pos,
                    format!("multiple root slot candidates: {}", names.join(", ")),
                ));
                return Err(diags);
            }
        };

        let mut space = PolicySpace {
            file: file.to_string(),
            paths: vec![String::new(); slots.len()],
            slot_dims: vec![0..0; slots.len()],
            slots,
            root,
            by_name,
            parent,
            dimensions: Vec::new(),
        };
        space.derive_dimensions(root, String::new(), &children);
        Ok(space)
    }

    fn derive_dimensions(&mut self, id: SlotId, prefix: String, children: &[Vec<SlotId>]) {
        let path = if prefix.is_empty() {
            self.slots[id].name.clone()
        } else {
            format!("{prefix}/{}", self.slots[id].name)
        };
        let start = self.dimensions.len();
        match self.slots[id].kind {
            SlotKind::Atomic => self.dimensions.push(Dimension {
                path: path.clone(),
                slot: id,
                kind: DimensionKind::Atomic,
                cardinality: (self.slots[id].values.len() + 1) as Coord,
            }),
            SlotKind::Aggregate => {
                for (i, v) in self.slots[id].values.iter().enumerate() {
                    self.dimensions.push(Dimension {
                        path: format!("{path}/{}", v.name),
                        slot: id,
                        kind: DimensionKind::Member(i),
                        cardinality: 2,
                    });
                }
            }
            SlotKind::Compound => {
                for &c in &children[id] {
                    self.derive_dimensions(c, path.clone(), children);
                }
            }
            SlotKind::Todo => {}
        }
        self.slot_dims[id] = start..self.dimensions.len();
        self.paths[id] = path;
    }

    pub fn file(&self) -> &str {
        &self.file
    }

    pub fn slots(&self) -> &[SlotDefinition] {
        &self.slots
    }

    pub fn slot(&self, id: SlotId) -> &SlotDefinition {
        &self.slots[id]
    }

    pub fn root(&self) -> SlotId {
        self.root
    }

    pub fn parent(&self, id: SlotId) -> Option<SlotId> {
        self.parent[id]
    }

    pub fn slot_path(&self, id: SlotId) -> &str {
        &self.paths[id]
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn dimension(&self, index: usize) -> &Dimension {
        &self.dimensions[index]
    }

    pub fn dimension_count(&self) -> usize {
        self.dimensions.len()
    }

    /// Sum of all dimension cardinalities; bounds the number of effective
    /// inference passes.
    pub fn total_coordinates(&self) -> usize {
        self.dimensions.iter().map(|d| d.cardinality as usize).sum()
    }

    /// Dimensions contributed by a slot and its descendants.
    pub fn slot_dimensions(&self, id: SlotId) -> Range<usize> {
        self.slot_dims[id].clone()
    }

    /// Resolves a bare slot name or a `/`-separated path from the root.
    pub fn find_slot(&self, reference: &str) -> Option<SlotId> {
        if !reference.contains('/') {
            return self.by_name.get(reference).copied();
        }
        (0..self.slots.len()).find(|&id| self.paths[id] == reference)
    }

    /// The single dimension of an atomic slot.
    pub fn atomic_dimension(&self, id: SlotId) -> Option<usize> {
        match self.slots[id].kind {
            SlotKind::Atomic => Some(self.slot_dims[id].start),
            _ => None,
        }
    }

    /// The membership dimension of one value of an aggregate slot.
    pub fn member_dimension(&self, id: SlotId, value: &str) -> Option<usize> {
        match self.slots[id].kind {
            SlotKind::Aggregate => self.slots[id]
                .value_index(value)
                .map(|i| self.slot_dims[id].start + i),
            _ => None,
        }
    }

    pub fn dimension_by_path(&self, path: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.path == path)
    }

    /// Coordinate of a declared atomic value (1-based; 0 is unset).
    pub fn value_coord(&self, id: SlotId, value: &str) -> Option<Coord> {
        match self.slots[id].kind {
            SlotKind::Atomic => self.slots[id].value_index(value).map(|i| (i + 1) as Coord),
            _ => None,
        }
    }

    /// The declared value a coordinate stands for; `None` at the bottom.
    ///
    /// For membership dimensions the value is the member name when present.
    pub fn value_name(&self, dim: usize, coord: Coord) -> Option<&str> {
        let d = &self.dimensions[dim];
        let slot = &self.slots[d.slot];
        match (d.kind, coord) {
            (_, 0) => None,
            (DimensionKind::Atomic, c) => slot.values.get(c as usize - 1).map(|v| v.name.as_str()),
            (DimensionKind::Member(i), 1) => Some(slot.values[i].name.as_str()),
            _ => None,
        }
    }

    /// Human-oriented name for a coordinate, including the bottom.
    pub fn coordinate_label(&self, dim: usize, coord: Coord) -> &str {
        match (self.dimensions[dim].kind, coord) {
            (DimensionKind::Atomic, 0) => "unset",
            (DimensionKind::Member(_), 0) => "false",
            (DimensionKind::Member(_), _) => "true",
            (DimensionKind::Atomic, c) => self.value_name(dim, c).unwrap_or("?"),
        }
    }

    pub fn bottom(&self) -> Location {
        Location::bottom(self.dimensions.len())
    }

    /// Location with every listed slot set and everything else at the bottom.
    ///
    /// Atomic slots take `(slot, value)`; aggregate slots take one pair per member.
    pub fn location_of(&self, pairs: &[(&str, &str)]) -> Result<Location, SpaceError> {
        let mut loc = self.bottom();
        for &(slot, value) in pairs {
            let (dim, coord) = self.resolve_assignment(slot, value)?;
            loc.coords[dim] = loc.coords[dim].max(coord);
        }
        Ok(loc)
    }

    /// Partial location with only the listed slots constrained.
    pub fn partial_location_of(&self, pairs: &[(&str, &str)]) -> Result<PartialLocation, SpaceError> {
        let mut p = PartialLocation::unconstrained(self.dimensions.len());
        for &(slot, value) in pairs {
            let (dim, coord) = self.resolve_assignment(slot, value)?;
            p.coords[dim] = Some(coord);
        }
        Ok(p)
    }

    /// Maps `slot=value` (atomic) or `slot+=value` (aggregate member) to a
    /// dimension and coordinate.
    pub fn resolve_assignment(&self, slot: &str, value: &str) -> Result<(usize, Coord), SpaceError> {
        let id = self
            .find_slot(slot)
            .ok_or_else(|| SpaceError::UnknownSlot(slot.to_string()))?;
        let unknown = || SpaceError::UnknownValue {
            slot: slot.to_string(),
            value: value.to_string(),
        };
        match self.slots[id].kind {
            SlotKind::Atomic => {
                let c = self.value_coord(id, value).ok_or_else(unknown)?;
                Ok((self.slot_dims[id].start, c))
            }
            SlotKind::Aggregate => Ok((self.member_dimension(id, value).ok_or_else(unknown)?, 1)),
            _ => Err(SpaceError::NotADimension(slot.to_string())),
        }
    }

    pub fn check(&self, loc: &Location) -> Result<(), SpaceError> {
        if loc.len() != self.dimensions.len() {
            return Err(SpaceMismatch {
                expected: self.dimensions.len(),
                found: loc.len(),
            }
            .into());
        }
        for (i, (&c, d)) in loc.coords.iter().zip(&self.dimensions).enumerate() {
            if c >= d.cardinality {
                return Err(SpaceError::CoordinateOutOfRange {
                    dimension: i,
                    coord: c,
                });
            }
        }
        Ok(())
    }
}

/// Outcome of comparing two locations under the coordinate-wise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Equal,
    Less,
    Greater,
    Incomparable,
}

/// A point of a policy space: one coordinate index per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Location {
    coords: Vec<Coord>,
}

impl Location {
    pub fn bottom(dims: usize) -> Self {
        Location { coords: vec![0; dims] }
    }

    pub fn from_coords(coords: Vec<Coord>) -> Self {
        Location { coords }
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, dim: usize) -> Coord {
        self.coords[dim]
    }

    pub fn is_bottom(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn same_space(&self, other: &Location) -> Result<(), SpaceMismatch> {
        if self.coords.len() == other.coords.len() {
            Ok(())
        } else {
            Err(SpaceMismatch {
                expected: self.coords.len(),
                found: other.coords.len(),
            })
        }
    }

    pub fn compare(&self, other: &Location) -> Result<Relation, SpaceMismatch> {
        self.same_space(other)?;
        let mut less = false;
        let mut greater = false;
        for (a, b) in self.coords.iter().zip(&other.coords) {
            less |= a < b;
            greater |= a > b;
        }
        Ok(match (less, greater) {
            (false, false) => Relation::Equal,
            (true, false) => Relation::Less,
            (false, true) => Relation::Greater,
            (true, true) => Relation::Incomparable,
        })
    }

    /// `self <= other` in every dimension.
    pub fn le(&self, other: &Location) -> Result<bool, SpaceMismatch> {
        Ok(matches!(self.compare(other)?, Relation::Equal | Relation::Less))
    }

    /// Least upper bound: the per-dimension maximum.
    pub fn join(&self, other: &Location) -> Result<Location, SpaceMismatch> {
        self.same_space(other)?;
        Ok(Location {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        })
    }

    /// Raises one coordinate to at least `coord`. Returns whether it moved.
    pub fn raise(&mut self, dim: usize, coord: Coord) -> bool {
        if self.coords[dim] < coord {
            self.coords[dim] = coord;
            true
        } else {
            false
        }
    }

    /// Sum of coordinate indices; strictly increases with every effective raise.
    pub fn height(&self) -> usize {
        self.coords.iter().map(|&c| c as usize).sum()
    }
}

/// A location in which some dimensions are left unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialLocation {
    coords: Vec<Option<Coord>>,
}

impl PartialLocation {
    pub fn unconstrained(dims: usize) -> Self {
        PartialLocation { coords: vec![None; dims] }
    }

    pub fn from_coords(coords: Vec<Option<Coord>>) -> Self {
        PartialLocation { coords }
    }

    pub fn coords(&self) -> &[Option<Coord>] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn set(&mut self, dim: usize, coord: Coord) {
        self.coords[dim] = Some(coord);
    }

    /// Indices of the constrained dimensions.
    pub fn constrained(&self) -> impl Iterator<Item = (usize, Coord)> + '_ {
        self.coords
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
    }

    /// Unconstrained dimensions read as the bottom coordinate.
    pub fn to_location(&self) -> Location {
        Location {
            coords: self.coords.iter().map(|c| c.unwrap_or(0)).collect(),
        }
    }

    fn same_space(&self, l: &Location) -> Result<(), SpaceMismatch> {
        if self.coords.len() == l.len() {
            Ok(())
        } else {
            Err(SpaceMismatch {
                expected: self.coords.len(),
                found: l.len(),
            })
        }
    }

    /// `l` is at or above this anchor on every constrained dimension.
    pub fn compliance_space_contains(&self, l: &Location) -> Result<bool, SpaceMismatch> {
        self.same_space(l)?;
        Ok(self.constrained().all(|(i, c)| l.coords[i] >= c))
    }

    /// `l` is at or below this anchor on every constrained dimension.
    pub fn support_space_contains(&self, l: &Location) -> Result<bool, SpaceMismatch> {
        self.same_space(l)?;
        Ok(self.constrained().all(|(i, c)| l.coords[i] <= c))
    }
}

impl From<Location> for PartialLocation {
    fn from(l: Location) -> Self {
        PartialLocation {
            coords: l.coords.into_iter().map(Some).collect(),
        }
    }
}

pub fn compliance_space_contains(anchor: &PartialLocation, l: &Location) -> Result<bool, SpaceMismatch> {
    anchor.compliance_space_contains(l)
}

pub fn support_space_contains(anchor: &PartialLocation, l: &Location) -> Result<bool, SpaceMismatch> {
    anchor.support_space_contains(l)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "op", content = "coord")]
pub enum Constraint {
    AtLeast(Coord),
    AtMost(Coord),
    OneOf(Vec<Coord>),
}

impl Constraint {
    pub fn admits(&self, c: Coord) -> bool {
        match self {
            Constraint::AtLeast(m) => c >= *m,
            Constraint::AtMost(m) => c <= *m,
            Constraint::OneOf(set) => set.contains(&c),
        }
    }
}

/// A conjunction of per-dimension constraints describing a sub-space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspacePredicate {
    dimensions: usize,
    constraints: Vec<(usize, Constraint)>,
}

impl SubspacePredicate {
    /// The predicate with no constraints; contains every location.
    pub fn any(space: &PolicySpace) -> Self {
        SubspacePredicate {
            dimensions: space.dimension_count(),
            constraints: Vec::new(),
        }
    }

    /// Adds a constraint, rejecting dimensions or coordinates outside the space.
    pub fn with(mut self, space: &PolicySpace, dim: usize, constraint: Constraint) -> Result<Self, SpaceError> {
        let card = space
            .dimensions()
            .get(dim)
            .ok_or(SpaceError::CoordinateOutOfRange { dimension: dim, coord: 0 })?
            .cardinality;
        let coords: &[Coord] = match &constraint {
            Constraint::AtLeast(c) | Constraint::AtMost(c) => core::slice::from_ref(c),
            Constraint::OneOf(cs) => cs,
        };
        if let Some(&bad) = coords.iter().find(|&&c| c >= card) {
            return Err(SpaceError::CoordinateOutOfRange { dimension: dim, coord: bad });
        }
        self.constraints.push((dim, constraint));
        Ok(self)
    }

    pub fn constraints(&self) -> &[(usize, Constraint)] {
        &self.constraints
    }

    pub fn is_unconstrained(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn contains(&self, l: &Location) -> Result<bool, SpaceMismatch> {
        if l.len() != self.dimensions {
            return Err(SpaceMismatch {
                expected: self.dimensions,
                found: l.len(),
            });
        }
        Ok(self.constraints.iter().all(|(d, c)| c.admits(l.get(*d))))
    }
}
