//! Synthetic generator for human-centric tables (HCTs) paired with natural
//! language questions, exact ground-truth answers and property metadata, plus
//! the F1 / complete-containment scoring used to evaluate model answers.
//!
//! The pipeline mirrors the order of the modules:
//!
//! 1. [`vocab`] parses a domain vocabulary (attributes, value trees, numeric
//!    shortcuts).
//! 2. [`tablegen`] expands generic table templates into individual ones and
//!    samples relational base tables from them.
//! 3. [`pivot`] turns a relational table into an HCT with nested headers and
//!    aggregates, renders it, and can undo the pivot.
//! 4. [`query`] instantiates the fifteen query templates, evaluates them and
//!    carries an independent brute-force oracle.
//! 5. [`nl`] parses the question-template mini language and writes questions.
//! 6. [`annotate`] records table and question properties.
//! 7. [`eval`] normalizes predictions and scores them.
//! 8. [`dataset`] wires everything together with deterministic seeding.

pub mod annotate;
pub mod dataset;
pub mod domains;
pub mod error;
pub mod eval;
pub mod nl;
pub mod num;
pub mod pivot;
pub mod query;
pub mod tablegen;
pub mod vocab;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use num::Fixed;

/// Random stream used for every sampling decision.
pub type Stream = rand_chacha::ChaCha8Rng;

/// Default number of decimals for real values and averages.
pub const DEFAULT_DECIMALS: u8 = 2;
