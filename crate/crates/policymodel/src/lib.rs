//! File loading, command line and HTTP service for policy models.
//!
//! The model language and interview engine live in `policymodel-core`; this
//! crate adds everything that touches the outside world.

pub mod cli;
pub mod files;
pub mod manifest;
pub mod prompt;
pub mod service;

pub use policymodel_core as core;
