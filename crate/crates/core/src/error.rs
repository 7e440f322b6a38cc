use crate::set::RelSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("query hypergraph is disconnected (Cartesian products are excluded)")]
    Disconnected,

    #[error("query is not acyclic")]
    NotAcyclic,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("width cover search exceeded bound {bound} at plan node {node}")]
    WidthOverflow { node: usize, bound: usize },

    #[error("no cardinality for relation set {rels:?} and no estimator configured")]
    UnknownCardinality { rels: RelSet },

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for validation problems, 3 for caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded(_) => 3,
            _ => 2,
        }
    }
}
