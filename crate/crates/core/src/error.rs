use thiserror::Error;

use crate::graphs::{Edge, EdgeKind};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex count must be at least {min}, got {got}")]
    TooFewVertices { min: usize, got: usize },

    #[error("vertex {vertex} out of range 1..={q}")]
    VertexOutOfRange { vertex: usize, q: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate {kind} edge {edge}")]
    DuplicateEdge { kind: EdgeKind, edge: Edge },

    #[error("edge {edge} is not a {kind} edge of this interconnection")]
    UnknownEdge { kind: EdgeKind, edge: Edge },

    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },

    #[error("weight {value} on edge {edge} is not a positive finite number")]
    NonPositiveWeight { edge: Edge, value: f64 },

    #[error("invalid weight range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("matrix is not a valid laplacian: {0}")]
    InvalidLaplacian(String),

    #[error("interconnection is not structurally synchronizable ({0})")]
    NotSs(crate::structural::SsReason),

    #[error(
        "sign-pattern search needs {restorative} restorative edges but the budget allows {budget}"
    )]
    BudgetExceeded { restorative: usize, budget: usize },

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("topology mismatch: expected {expected}, found {found}")]
    WrongTopology {
        expected: &'static str,
        found: String,
    },

    #[error("invalid oscillator system: {0}")]
    InvalidSystem(String),

    #[error("invalid simulation parameters: {0}")]
    InvalidSimulation(String),

    #[error("state became non-finite at t = {time}")]
    Unstable { time: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
