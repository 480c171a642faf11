use thiserror::Error;

use crate::lp::{Fact, Literal};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A body literal has more than one maximal solution under the current bindings.
    #[error("literal {literal} is not determinate: {first:?} and {second:?} both satisfy it")]
    DeterminacyViolation {
        literal: Literal,
        first: Fact,
        second: Fact,
    },

    #[error("predicate `equal` is already used inconsistently: {0}")]
    PredicateCollision(Fact),

    #[error("cannot embed clause into the bottom clause: {0}")]
    EmbeddingFailure(String),

    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unsupported function symbol `{0}` (only lists can be flattened)")]
    NonListFunctor(String),

    #[error("basecase oracle failed: {0}")]
    BasecaseOracle(String),

    #[error("target program has no designated base clause")]
    NoBaseClause,

    #[error("pool instance {index} is labelled {labelled} but the target says {actual}")]
    PoolLabelMismatch {
        index: usize,
        labelled: bool,
        actual: bool,
    },

    #[error("teacher transport error: {0}")]
    Teacher(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// An internal invariant did not hold; this is a bug, not an input problem.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
