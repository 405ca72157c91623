use thiserror::Error;

use crate::linalg::Inertia;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {block}")]
    NonFinite { block: &'static str },
    #[error("barrier parameter must be positive, got {0}")]
    NonPositiveBarrier(f64),
    #[error("retraction argument {0} leaves the representable range")]
    Overflow(f64),
    #[error("retraction failed at index {index}: {source}")]
    RetractionAt {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("iterate left the interior: {0}")]
    NotInterior(String),
    #[error("matrix is singular after regularization (inertia {inertia:?})")]
    Singular { inertia: Inertia },
    #[error("NaN encountered in {0}")]
    NaN(String),
    #[error("dense eigensolver limited to dimension {cap}, got {dim}; disable spectrum tracing")]
    SpectrumCap { dim: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("linear solve failed at iteration {iteration}: {source}")]
    LinearSolve {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("trace iteration {got} does not follow {last}")]
    TraceOrder { last: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("infeasible bounds for column {column}: lower {lower} > upper {upper}")]
    InfeasibleBounds {
        column: String,
        lower: f64,
        upper: f64,
    },
    #[error("unknown builtin problem {name:?}; available: {available}")]
    UnknownProblem { name: String, available: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            got,
        }
    }
}
