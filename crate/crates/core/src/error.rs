use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },

    #[error("edge {{{0}, {1}}} is not in the graph")]
    MissingEdge(usize, usize),

    #[error("edge {{{edge_u}, {edge_v}}} is not incident to vertex {vertex}")]
    NotIncident {
        vertex: usize,
        edge_u: usize,
        edge_v: usize,
    },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("quantity is undefined on an edgeless graph")]
    EmptyGraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A size guard on an exhaustive routine was violated.
    #[error("size guard violated: {0}")]
    Guard(String),

    #[error("enumeration of {required} candidates exceeds the hard limit of {limit}")]
    BudgetExceeded { required: u128, limit: u128 },
}
