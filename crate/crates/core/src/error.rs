use thiserror::Error;

use crate::terms::{Atom, Variable};

/// Errors raised by the in-memory vocabulary and the evaluation layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("variable {0} is not bound by the substitution")]
    StrictModeUnbound(Variable),
    #[error("expected a boolean query, found arity {0}")]
    NotBoolean(usize),
    #[error("atom {0} is not ground and cannot be stored in an instance")]
    NonGroundAtom(Atom),
    #[error("predicate {predicate} used with arity {found}, previously {expected}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("dependency is not a single-disjunct TGD")]
    NotATgd,
}
