//! Policy spaces, decision graphs, value inferencers and interview execution.
//!
//! A model has three parts:
//!
//! * a [`space::PolicySpace`]: a tree of slots whose leaves define the
//!   dimensions of a product lattice of [`space::Location`]s;
//! * a [`graph::DecisionGraph`]: the interview, whose `[set]` nodes raise the
//!   current location;
//! * [`inference::ValueInferencer`]s that derive further coordinates.
//!
//! [`model::Model::build`] parses and validates the sources; an
//! [`engine::Session`] runs the interview and [`analysis`] enumerates every
//! possible run.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod diag;
pub mod engine;
pub mod graph;
pub mod inference;
pub mod localization;
pub mod model;
pub mod parse;
pub mod space;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

#[cfg(test)]
mod testdata;

pub use diag::{Diagnostic, Diagnostics, Severity};
pub use engine::{EngineError, FinalReport, Journal, Session};
pub use model::{Model, ModelSources};
pub use space::{Location, PolicySpace};
