use thiserror::Error;

/// Errors raised while building, transforming or solving a problem.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("inconsistent bounds on {kind} {index}: lower {lower} > upper {upper}")]
    InconsistentBounds {
        kind: &'static str,
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("complementarity variable {index} needs a finite lower bound on {side}")]
    InfiniteComplementarityBound { index: usize, side: &'static str },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("pair {index} is not complementary: x1*x2 = {residual:e}")]
    ComplementarityInfeasible { index: usize, residual: f64 },

    #[error("iterate is not strictly interior: {component}[{index}] = {value:e}")]
    NonInterior {
        component: &'static str,
        index: usize,
        value: f64,
    },

    #[error("function evaluation failed: {0}")]
    Evaluation(String),

    #[error("KKT matrix could not be corrected (delta_w = {delta_w:e})")]
    UnrecoverableKkt { delta_w: f64 },

    #[error("biactive set of size {size} exceeds the enumeration cap {cap}")]
    EnumerationCapExceeded { size: usize, cap: usize },

    #[error("{what} ended with status {status}")]
    SubproblemFailed { what: String, status: String },

    #[error("branch NLP is infeasible: {status}, constraint violation {violation:e}")]
    BranchInfeasible { status: String, violation: f64 },

    #[error("unknown option `{0}`")]
    UnknownOption(String),

    #[error("invalid value `{value}` for option `{key}`: {reason}")]
    InvalidOption {
        key: String,
        value: String,
        reason: String,
    },

    #[error("unknown builtin problem `{0}`")]
    UnknownBuiltin(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;

impl From<std::io::Error> for SolverError {
    fn from(e: std::io::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}
