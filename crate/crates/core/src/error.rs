use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("parallel edge ({0}, {1})")]
    ParallelEdge(usize, usize),
    #[error("graph has {0} connected components, expected 1")]
    Disconnected(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("no connected sample after {0} attempts")]
    RetryBudgetExhausted(usize),
    #[error("bin combination ({0}, {1}) is unreachable for this source")]
    Unreachable(String, String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
