//! Reasoning with existential and disjunctive rules.
//!
//! The crate covers the full pipeline from program text to certain answers:
//!
//! - [`terms`], [`instance`], [`substitution`], [`homomorphism`], [`dependency`]
//!   and [`query`] hold the value vocabulary: constants, labelled nulls,
//!   atoms, instances, rules and conjunctive queries, plus homomorphism search.
//! - [`parser`] reads and writes the rule language.
//! - [`classify`] decides membership in the syntactic fragments (inclusion
//!   dependencies, linear, guarded, weakly-guarded, weakly-acyclic, sticky)
//!   and produces witnesses.
//! - [`chase`] is the restricted chase for TGDs, EGDs and negative
//!   constraints; [`dchase`] is the disjunctive chase tree and certain-answer
//!   evaluation over its leaves.
//! - [`generate`] builds random programs for property tests and the CLI.

pub mod chase;
pub mod classify;
pub mod cli;
pub mod dchase;
pub mod dependency;
pub mod error;
pub mod generate;
pub mod homomorphism;
pub mod instance;
pub mod parser;
pub mod query;
pub mod substitution;
pub mod terms;

pub use chase::{chase, Budget, ChaseOutcome};
pub use classify::{classify, FragmentReport};
pub use dchase::{certain_answers, certain_bcq, disjunctive_chase, ChaseTree, Entailment};
pub use dependency::{Dependency, Disjunct, Dtgd, Egd, NegConstraint};
pub use error::CoreError;
pub use homomorphism::find_homomorphisms;
pub use instance::Instance;
pub use parser::{parse_program, serialize_program, ParseError, Program};
pub use query::{answers, evaluate_bcq, normalize_query, ConjunctiveQuery};
pub use substitution::{apply_substitution, Substitution};
pub use terms::{Atom, Constant, Null, Position, Term, Variable};
