use sroel_datalog::DatalogError;

use crate::syntax::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum SroelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("knowledge base is not simple: typicality outside a left-hand side in `{axiom}`")]
    NotSimple { axiom: String },
    #[error("knowledge base is classically inconsistent")]
    Inconsistent,
    #[error(transparent)]
    Datalog(#[from] DatalogError),
    #[error("unsupported query: {0}")]
    Unsupported(String),
    #[error("search space too large: {0}")]
    BoundOverflow(String),
}

pub type Result<T, E = SroelError> = std::result::Result<T, E>;
