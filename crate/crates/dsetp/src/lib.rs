//! Discontinuous constituency parsing with a set-based transition system.
//!
//! The parser keeps its pending subtrees in an unordered, random-access set
//! instead of a stack, so a discontinuous constituent is built in a single
//! combine step and every tree over n tokens is derived in exactly 4n-2
//! transitions. The crate provides:
//!
//! - the transition system itself ([`transition`]);
//! - a static oracle producing canonical derivations and a dynamic oracle
//!   returning the F-optimal actions from any configuration, plus an
//!   exhaustive reference oracle for verifying both ([`oracle`]);
//! - a trainable scorer over constituent boundaries with joint POS tagging
//!   ([`model`]);
//! - discbracket treebank I/O and vocabulary construction ([`treebank`]);
//! - labelled F evaluation with a discontinuous-only variant ([`eval`]);
//! - a random generator of valid discontinuous trees ([`generate`]).
//!
//! See the `examples/` directory for a runnable tour and the `dsetp` binary
//! for the command-line interface.

pub mod cli;
pub mod eval;
pub mod generate;
pub mod model;
pub mod oracle;
pub mod sample;
pub mod transition;
pub mod tree;
pub mod treebank;

pub use eval::{labelled_fscore, score_corpus, EvalFilter, EvalReport};
pub use oracle::{dynamic_oracle, static_oracle, tie_break, OracleAnswer};
pub use transition::{replay, Action, Configuration};
pub use tree::{Constituent, DiscTree, IndexSet};
pub use treebank::{read_discbracket, write_discbracket, Corpus, Vocabulary};
