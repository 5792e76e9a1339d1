//! strsat is a decision procedure for a bounded theory of strings over a
//! finite alphabet. Formulas are conjunctions of possibly negated atoms
//! (`=`, `contains`, `contains-at`) over terms built from variables,
//! constants, substring extraction, and concatenation, with every string
//! capped by a global length bound.
//!
//! The solver pipeline is: constant propagation and containment-graph
//! analysis ([`preprocess`]), an equality-fragment fast path, bit-level
//! encoding of cells and lengths ([`bitblast`]), and an embedded CDCL SAT
//! engine with assumption-based unsat cores ([`satcore`]). The [`engine`]
//! module drives either a single monolithic encoding or a staged loop that
//! refines length candidates and containment position windows from cores.
//!
//! Companion modules: [`reductions`] materializes the 3-CNF-SAT reduction
//! gadgets for six theory fragments together with an equisatisfiability
//! harness, [`oracle`] is a brute-force enumeration reference, [`textio`]
//! reads and writes the `.strf` constraint format and DIMACS CNF, and
//! [`gen`] produces seeded random instances for differential testing.

pub mod ast;
pub mod bitblast;
pub mod engine;
pub mod eval;
pub mod gen;
pub mod oracle;
pub mod preprocess;
pub mod reductions;
pub mod satcore;
pub mod textio;

pub use ast::{Alphabet, Assignment, Atom, BoolExpr, Formula, Literal, SolverConfig, StrTerm};
pub use engine::{Mode, SolveOutcome, Verdict};
