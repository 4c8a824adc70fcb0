//! Parsers for the three model languages and their canonical printers.
//!
//! * `.ps` policy spaces: `Name: consists of A, B.`, `Name: one of v1, v2.`,
//!   `Name: some of v1, v2.`, `Name: TODO.`; `<--` starts a remark (to end of
//!   line) attached to the preceding name; `#` starts a comment.
//! * `.dg` decision graphs: bracketed nodes, see [`parse_decision_graph`].
//! * `.vi` value inferencers: `[Target: support|comply [A=a; B=b -> v] ...]`.

mod cursor;
mod graph;
mod inferencer;
mod print;
mod space;

pub use graph::parse_decision_graph;
pub use inferencer::parse_value_inferencers;
pub use print::{print_decision_graph, print_policy_space, print_value_inferencers};
pub use space::parse_policy_space;
