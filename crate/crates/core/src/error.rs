use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid formula: {0}")]
    InvalidFormula(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("lp solver failure: {0}")]
    Lp(String),

    #[error("cutting-plane loop hit the iteration cap ({0} rounds)")]
    IterationCap(usize),

    #[error("separation returned a cut violated by only {violation:e} (< {tol:e})")]
    StalledCut { violation: f64, tol: f64 },

    #[error("no good radius in [0, {max_radius}] around vertex {center}")]
    NoGoodRadius { center: VertexId, max_radius: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("inconsistent recursion trace: {0}")]
    InconsistentTrace(String),

    #[error("decomposition width {width} exceeds cap {cap}")]
    WidthCap { width: usize, cap: usize },
}

impl Error {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
