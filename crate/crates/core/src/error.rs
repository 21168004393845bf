use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("node budget exceeded: {required} nodes required, budget is {budget}")]
    Budget { required: u128, budget: usize },
    #[error("insufficient itinerary depth: need {need}, have {have}")]
    Depth { need: usize, have: usize },
    #[error("infeasible cone parameters: {0}")]
    Infeasible(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("node mismatch: {0}")]
    NodeMismatch(String),
    #[error("quantitative cone guarantees need a constant potential")]
    NonConstantPotential,
}

pub type Result<T> = std::result::Result<T, Error>;
