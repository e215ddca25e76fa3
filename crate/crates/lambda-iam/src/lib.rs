//! A machine that evaluates λ-terms by moving a token over an immutable
//! term instead of rewriting it, together with the linear head evaluation
//! it implements, the run-level invariant checkers that certify it, and a
//! stack-level view matching the proof-net formulation.
//!
//! The crate is organized around the life of a query:
//!
//! - [`syntax`]: terms with explicit substitutions, occurrence paths,
//!   leveled contexts and positions;
//! - [`machine`]: the state quintuple, the twelve transitions, runs, and
//!   the depth-indexed semantics;
//! - [`reduction`]: head evaluation and linear head evaluation, the
//!   independent oracle the machine is checked against;
//! - [`exhaust`]: tape and log tests, and the bounded exhaustibility
//!   decision procedure;
//! - [`improve`]: the step-indexed relations between runs of a term and
//!   runs of its reduct, with diagram, soundness and run-length checkers;
//! - [`goi`]: exponential signatures and the boxes/balancing stacks, with
//!   the macro-to-micro expansion of the variable transitions;
//! - [`gen`]: seeded term generators for the test corpora.

pub mod exhaust;
pub mod gen;
pub mod goi;
pub mod improve;
pub mod machine;
pub mod reduction;
pub mod stack;
pub mod syntax;
