//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which validity condition an operator violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// Insert requires x and y to be nonadjacent.
    Adjacent,
    /// Delete requires the edge x-y or x->y to exist.
    MissingEdge,
    /// T must consist of undirected neighbours of y that are nonadjacent to x.
    BadInsertSet,
    /// H must be a subset of NA_x(y).
    BadDeleteSet,
    /// NA_x(y) together with T (Insert), or NA_x(y) \ H (Delete), must be a clique.
    NotClique,
    /// Some semi-directed path from y to x avoids NA_x(y) and T.
    Unblocked,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Violation::Adjacent => "endpoints are adjacent",
            Violation::MissingEdge => "edge x-y or x->y does not exist",
            Violation::BadInsertSet => "T is not a set of undirected neighbours of y nonadjacent to x",
            Violation::BadDeleteSet => "H is not a subset of NA_x(y)",
            Violation::NotClique => "required vertex set is not a clique",
            Violation::Unblocked => "a semi-directed path from y to x is not blocked",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {v} out of range for graph with {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },

    #[error("self-loops are not allowed (vertex {0})")]
    SelfLoop(usize),

    #[error("vertices {0} and {1} are already adjacent")]
    DuplicateEdge(usize, usize),

    #[error("no edge between {0} and {1}")]
    NoSuchEdge(usize, usize),

    #[error("graph contains a directed cycle")]
    DirectedCycle,

    #[error("graph is not a directed graph: vertex {0} has undirected edges")]
    UndirectedEdges(usize),

    #[error("graph is not a completed CPDAG")]
    NotCompleted,

    #[error("graph is not chordal")]
    NotChordal,

    #[error("priority prefix is not a clique of undirected neighbours")]
    PrefixNotClique,

    #[error("invalid operator: {0}")]
    InvalidOperator(Violation),

    #[error("inverse_operator inputs are inconsistent: applying the operator does not give the stated result")]
    InverseMismatch,

    #[error("no locally valid operator exists")]
    EmptySupport,

    #[error("graph parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
