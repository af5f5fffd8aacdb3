use thiserror::Error;

use crate::bigraded::BiDegree;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix of {rows}x{cols} cells exceeds the budget of {budget} cells")]
    DimensionOverflow { rows: usize, cols: usize, budget: usize },

    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),

    #[error("malformed matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("expected an element of bidegree {expected}, found {found}")]
    BidegreeMismatch { expected: BiDegree, found: BiDegree },

    #[error("trace undefined: top piece {bidegree} has dimension {dim}, expected 1")]
    TraceUndefined { bidegree: BiDegree, dim: usize },

    #[error("bad subspace: {0}")]
    BadSubspace(String),

    #[error("bad index list: {0}")]
    BadIndexList(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("coefficient denominator vanishes modulo {0}")]
    BadReduction(u64),

    #[error("no certified instance after {attempts} attempts")]
    GenerationBudgetExhausted { attempts: usize },

    #[error("Koszul differentials do not compose to zero at {0}")]
    KoszulIdentity(String),

    #[error("instance file: {pointer}: {message}")]
    Schema { pointer: String, message: String },
}
