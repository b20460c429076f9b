use thiserror::Error;

use crate::boolring::Var;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("product of degree {degree} exceeds the degree cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("the zero polynomial has no leading monomial")]
    ZeroPolynomial,

    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{n} variables exceed the exhaustive-enumeration cap of {cap}")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("variable index {0} is out of range (at most {max} variables)", max = crate::boolring::MAX_VARS)]
    VariableOutOfRange(usize),

    #[error("variable x{0} is not live in this system")]
    VariableNotLive(Var),

    #[error("variable x{0} appears twice in the elimination order")]
    RepeatedVariable(Var),

    #[error("the system is inconsistent: the constant 1 was derived")]
    Inconsistent,

    #[error("procedure B did not stabilise within {budget} iterations")]
    LoopBudgetExceeded { budget: usize },

    #[error("generator count {count} exceeds the cap of {cap}")]
    GeneratorExplosion { count: usize, cap: usize },

    #[error("a key space of {bits} bits exceeds the exhaustive cap of {cap} bits")]
    KeySpaceTooLarge { bits: usize, cap: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
